import ast
import logging
import os
import os.path
from configparser import RawConfigParser
from typing import Any, Dict, List, Optional

from packaging.version import Version

from twistframe.common.version import str_to_version

base_logger = logging.getLogger("twistframe.config")


def environ_bool(env_name: str, default: bool) -> bool:
    val = os.getenv(env_name, "default").lower()
    if val in ["on", "true", "1"]:
        return True
    if val in ["off", "false", "0"]:
        return False
    if val == "default":
        return default
    raise ValueError(
        f"Environment variable {env_name} set to invalid value " f"{val} (use either on/true/1 or off/false/0)"
    )


# default templates directory
TEMPLATES_DIR = os.getenv("TWISTFRAME_TEMPLATES_DIR", "/usr/share/twistframe/templates")

# Possible paths for base configuration files
CONFIG_FILES = {
    "twistframe": ["/etc/twistframe/twistframe.conf", "/usr/etc/twistframe/twistframe.conf"],
    "logging": ["/etc/twistframe/logging.conf", "/usr/etc/twistframe/logging.conf"],
}

# Paths to directories in which options can be overriden using configuration
# snippets
CONFIG_SNIPPETS_DIRS = {
    "twistframe": ["/usr/etc/twistframe/twistframe.conf.d", "/etc/twistframe/twistframe.conf.d"],
    "logging": ["/usr/etc/twistframe/logging.conf.d", "/etc/twistframe/logging.conf.d"],
}

CONFIG_ENV = {
    "twistframe": os.environ.get("TWISTFRAME_TWISTFRAME_CONFIG", ""),
    "logging": os.environ.get("TWISTFRAME_LOGGING_CONFIG", ""),
}

# Values used when neither a configuration file nor an environment variable
# provides an option. Keys are (section, option) of the "twistframe" component.
DEFAULTS: Dict[str, Dict[str, str]] = {
    "twistframe": {"version": "1.0"},
    "grid": {
        "phase_plane_half_width": "8",
        "phase_plane_samples_per_unit": "32",
        "group_t_half_width": "4",
        "group_t_samples_per_unit": "16",
        "midpoint": "True",
    },
    "spectral": {
        "m_truncation": "256",
        "epsilon": "1e-6",
        "epsilon_schedule": "[1e-2, 1e-4, 1e-6, 1e-8]",
        "l_max": "4",
    },
    "weyl": {"frequency_radius": "2048"},
    "frames": {"radii": "[2, 4, 8, 16]", "gram_cap": "4096"},
    "heisenberg": {
        "r_truncation": "8",
        "lambda_samples": "64",
        "k_max": "2",
        "l_max": "2",
        "m_max": "2",
    },
    "runtime": {"threads": "0", "output_dir": "."},
}

# Single instance
_config: Optional[Dict[str, RawConfigParser]] = None


def get_config(component: str) -> RawConfigParser:
    """Find the configuration file to use for the given component and apply the
    overrides defined by configuration snippets.

    A configuration file set through the TWISTFRAME_<COMPONENT>_CONFIG
    environment variable has top priority and disables all other files. Else
    the first existing file from CONFIG_FILES is read and the snippets found in
    the CONFIG_SNIPPETS_DIRS of the component are applied in sorted order.

    A missing configuration is not an error: the accessors fall back to
    DEFAULTS.
    """

    global _config

    if not _config:
        _config = {}

    if not component:
        raise Exception("No component provided to get_config")

    if component not in _config:
        _config[component] = RawConfigParser()

        if not CONFIG_ENV or not isinstance(CONFIG_ENV, dict):
            raise Exception("Invalid CONFIG_ENV")

        if not component in CONFIG_ENV:
            raise Exception(f"Invalid component '{component}'")

        if CONFIG_ENV[component]:
            if os.path.isfile(CONFIG_ENV[component]):
                config_files = _config[component].read(CONFIG_ENV[component])
                base_logger.info("Reading configuration from %s", config_files)
                return _config[component]

            base_logger.info(
                "Configuration file %s for %s set through environment variable not found, falling back to installed configuration",
                CONFIG_ENV[component],
                component,
            )

        if not CONFIG_FILES or not isinstance(CONFIG_FILES, dict):
            raise Exception("Invalid CONFIG_FILES")

        if not component in CONFIG_FILES:
            raise Exception(f"Invalid component {component}")

        if not any(os.path.exists(c) for c in CONFIG_FILES[component]):
            base_logger.debug(
                "Config file not found in %s, using built-in defaults for component %s",
                CONFIG_FILES[component],
                component,
            )
        else:
            for c in CONFIG_FILES[component]:
                config_file = _config[component].read(c)
                if config_file:
                    base_logger.info("Reading configuration from %s", config_file)

                    for d in (x for x in CONFIG_SNIPPETS_DIRS.get(component, []) if os.path.exists(x)):
                        snippets = sorted(filter(os.path.isfile, (os.path.join(d, f) for f in os.listdir(d) if f)))
                        applied_snippets = _config[component].read(snippets)
                        if applied_snippets:
                            base_logger.info("Applied configuration snippets from %s", d)

                    break

    return _config[component]


def _get_env(component: str, option: str, section: Optional[str]) -> Optional[str]:
    opt_section = f"_{section.upper()}" if section else ""
    env_name = f"TWISTFRAME_{component.upper()}{opt_section}_{option.upper()}"
    env_value = os.environ.get(env_name, None)
    if env_value is not None:
        log_msg = f'option "{option}" on section {section} for component {component}.conf was overriden by environment variable {env_name}'
        base_logger.info(log_msg.replace("on section None ", ""))

    return env_value


def _default(component: str, section: str, option: str) -> Optional[str]:
    if component != "twistframe":
        return None
    return DEFAULTS.get(section, {}).get(option)


def _read(component: str, option: str, section: Optional[str]) -> Optional[str]:
    env_value = _get_env(component, option, section)
    if not section:
        section = component

    if env_value is not None:
        return env_value.strip('" ')

    c = get_config(component)
    if c.has_option(section, option):
        return c.get(section, option).strip('" ')

    return _default(component, section, option)


def getlist(component: str, option: str, section: Optional[str] = None) -> List[Any]:
    read = _read(component, option, section)

    if read:
        try:
            l = ast.literal_eval(read)
        except Exception as e:
            raise Exception(
                f"Failed to get list from config for component '{component}', section '{section}', option '{option}'"
            ) from e
        if isinstance(l, (list, tuple)):
            return [i.strip() if isinstance(i, str) else i for i in l]
        raise Exception(f"Config option '{option}' in section '{section}' of component {component} should be a list")

    raise Exception(f"Could not find option '{option}' in section '{section}' of component '{component}'")


def get(component: str, option: str, section: Optional[str] = None, fallback: str = "") -> str:
    read = _read(component, option, section)
    return fallback if read is None else read


def getint(component: str, option: str, section: Optional[str] = None, fallback: int = -1) -> int:
    read = _read(component, option, section)
    return fallback if read is None else int(read)


def getboolean(component: str, option: str, section: Optional[str] = None, fallback: bool = False) -> bool:
    read = _read(component, option, section)
    if read is None:
        return fallback
    value = read.lower()
    if value not in RawConfigParser.BOOLEAN_STATES:
        return fallback
    return RawConfigParser.BOOLEAN_STATES[value]


def getfloat(component: str, option: str, section: Optional[str] = None, fallback: float = -1.0) -> float:
    read = _read(component, option, section)
    return fallback if read is None else float(read)


def has_option(component: str, option: str, section: Optional[str] = None) -> bool:
    return _read(component, option, section) is not None


def check_version(component: str, logger: Optional[logging.Logger] = None) -> bool:
    """
    Check the component configuration version against the available templates
    and return a boolean indicating whether an upgrade is available
    """

    if not os.path.isdir(TEMPLATES_DIR):
        if logger:
            logger.warning("The configuration templates path %s does not exist", TEMPLATES_DIR)
        return False

    versions = sorted(
        (Version(f"{v[0]}.{v[1]}") for v in map(str_to_version, os.listdir(TEMPLATES_DIR)) if v is not None),
        reverse=True,
    )

    if not versions:
        if logger:
            logger.warning("The path %s does not contain valid configuration version directories", TEMPLATES_DIR)
        return False

    config_version = get(component, "version", fallback="1.0")
    if str_to_version(config_version) is None:
        raise Exception(f"Invalid version in {component} configuration file")

    cur_version = Version(config_version)
    latest = versions[0]

    if cur_version < latest:
        if logger:
            logger.warning(
                "A configuration upgrade is available (from %s to %s). Run 'twistframe_write_config' to upgrade the configuration",
                cur_version,
                latest,
            )
        return True

    return False
