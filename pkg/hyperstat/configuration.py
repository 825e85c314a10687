# SPDX-License-Identifier: BSD-3-Clause

"""Central location for the user's configuration, log file and run artifacts.

The data directory is `<user data>/hyperstat`, where `<user data>` is OS-dependent:

- Windows: `$USER_HOME\\AppData\\Local`
- macOS: `~/Library/Application Support`
- Linux: `~/.local/share`

`XDG_DATA_HOME` takes precedence on all OSes if set, and `HYPERSTAT_DATA_DIR` overrides
the whole path.
"""

import json
import logging
import math
import os
import platform
import sys
from copy import deepcopy
from pathlib import Path


logger = logging.getLogger(__name__)


HYPERSTAT_VERSION = "0.1.0"


def _user_data_dir() -> Path:
    if os.environ.get("HYPERSTAT_DATA_DIR"):
        return Path(os.environ["HYPERSTAT_DATA_DIR"])
    if os.environ.get("XDG_DATA_HOME"):
        return Path(os.environ["XDG_DATA_HOME"]) / "hyperstat"
    if platform.system() == "Windows":
        return Path.home() / "AppData" / "Local" / "hyperstat"
    elif platform.system() == "Darwin":
        return Path.home() / "Library" / "Application Support" / "hyperstat"
    else:
        return Path.home() / ".local" / "share" / "hyperstat"


DATA_DIR = _user_data_dir()
CONFIG_FILE = DATA_DIR / "config.json"
LOG_FILE = DATA_DIR / "log.log"


defaults = {
    "threads": 1,
    "runs_dir": str((DATA_DIR / "runs").as_posix()),
    "schedule": {"c_eta": None, "c_eps": 1.0, "c_w": 1.0},
    "gamma": 0.1,
    "inner_max_evals": 100_000,
    "inner_bound": 4 * math.pi,
    "n_starts": 16,
}


def load_config() -> dict:
    """Read the user config, filling in anything missing with the defaults."""
    loaded = {}
    if CONFIG_FILE.exists():
        try:
            with open(CONFIG_FILE, encoding="utf-8") as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as err:
            logger.warning(f"Ignoring unreadable config file {CONFIG_FILE}: {err}")
    merged = deepcopy(defaults)
    for k, v in loaded.items():
        if isinstance(v, dict) and isinstance(merged.get(k), dict):
            merged[k].update(v)
        else:
            merged[k] = v
    return merged


config = load_config()


def save_config():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    with open(CONFIG_FILE, "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2)
    logger.debug(f"Saved config to {CONFIG_FILE}")


def runs_dir() -> Path:
    return Path(config["runs_dir"])


def worker_count() -> int:
    """Size of the experiment worker pool; `HYPERSTAT_THREADS` wins over the config."""
    env = os.environ.get("HYPERSTAT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"Ignoring non-integer HYPERSTAT_THREADS={env!r}")
    return max(1, int(config["threads"]))


def configure_logging(debug: bool = False):
    """Log to the data directory and to stderr."""
    level = logging.DEBUG if debug else logging.INFO
    root = logging.getLogger("hyperstat")
    root.setLevel(level)
    if not any(isinstance(h, logging.FileHandler) for h in root.handlers):
        try:
            DATA_DIR.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(LOG_FILE, encoding="utf-8")
            file_handler.setFormatter(
                logging.Formatter("%(asctime)s %(name)s %(levelname)s: %(message)s")
            )
            root.addHandler(file_handler)
        except OSError:
            # Read-only home directories are common on clusters; stderr still works
            pass
    # Always bound to the current sys.stderr
    for handler in [h for h in root.handlers if type(h) is logging.StreamHandler]:
        root.removeHandler(handler)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(logging.Formatter("%(name)s %(levelname)s: %(message)s"))
    stream.setLevel(logging.DEBUG if debug else logging.WARNING)
    root.addHandler(stream)
