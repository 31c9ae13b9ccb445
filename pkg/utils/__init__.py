# Installs the TRACE level on every logger before any module logs.
from utils import logger  # noqa: F401
