import logging

# Enabling logs
log = logging.getLogger(__name__)


def record_usage(args) -> None:
    """Recording useage of command"""
    options = {key: value for key, value in vars(args).items() if key not in ("func", "command", "argv")}
    log.info(msg=f"pinlab issued command {args.command} with {options}")
