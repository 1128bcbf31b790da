"""Shared helpers: logging setup, CSV output and physical constants."""
import logging
import os
from typing import Optional

import pandas as pd
from scipy import constants

C_LIGHT = constants.c  # m/s
HBAR = constants.hbar  # J s
EPSILON_0 = constants.epsilon_0  # F/m

CSV_FLOAT_FORMAT = "%.9g"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str = "INFO") -> None:
    """Configure root logging once; logs go to stderr."""
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)


def wavelength_um_to_omega(wavelength_um):
    """Angular frequency in rad/s for a vacuum wavelength in micrometres."""
    return 2.0 * constants.pi * C_LIGHT / (wavelength_um * 1e-6)


def omega_to_wavelength_um(omega):
    return 2.0 * constants.pi * C_LIGHT / omega * 1e6


def write_csv(frame: pd.DataFrame, path: str, columns: Optional[list] = None) -> str:
    """Write a DataFrame with a header row, fixed column order and 9 significant digits."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if columns is not None:
        frame = frame.loc[:, columns]
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logging.getLogger(__name__).info(f"Wrote {len(frame)} rows to {path}")
    return path
