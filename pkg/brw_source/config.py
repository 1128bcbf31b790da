import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    # Logging
    LOG_LEVEL = os.environ.get('BRW_LOG_LEVEL', 'INFO')

    # Output
    OUTPUT_DIR = os.environ.get('BRW_OUTPUT_DIR', 'results')

    # Run defaults
    DEFAULT_CONFIG = os.environ.get('BRW_CONFIG')
    THREADS = int(os.environ.get('BRW_THREADS', 1))
    SEED = int(os.environ.get('BRW_SEED', 1))
