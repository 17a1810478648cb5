# Racine du dépôt sur sys.path pour les imports CORE.*, FEEDBACK.*, ...
import path_setup  # noqa: F401
