# debug_utils.py
import logging
import os

LOG_FILE_NAME = 'spme_debug.log'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logging(debug_mode=False, log_file=LOG_FILE_NAME, console=False):
    """
    Set up logging for the laboratory.

    Args:
        debug_mode (bool): If True, sets the logging level to DEBUG.
                           Otherwise, it's set to INFO.
        log_file (str): Log file, cleared on each run. None disables file logging.
        console (bool): Also log to stderr.
    """
    log_level = logging.DEBUG if debug_mode else logging.INFO
    root = logging.getLogger('')
    if getattr(root, '_spme_configured', False):
        root.setLevel(log_level)
        return

    handlers = []
    if log_file:
        if os.path.exists(log_file):
            # Clear the log file on each run
            with open(log_file, 'w'):
                pass
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    if console:
        handlers.append(logging.StreamHandler())

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    for handler in handlers:
        handler.setLevel(log_level)
        handler.setFormatter(formatter)
        root.addHandler(handler)
    root.setLevel(log_level)
    root._spme_configured = True

    logging.info("Logging initialized.")


def get_logger(name):
    """
    Get a logger instance.

    Args:
        name (str): The name of the logger, usually __name__.

    Returns:
        logging.Logger: A logger instance.
    """
    return logging.getLogger(name)
