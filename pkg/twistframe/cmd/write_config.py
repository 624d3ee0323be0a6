#!/usr/bin/env python3

"""
 Render the configuration files of twistframe from the templates.

 Each component ("twistframe" and "logging") has a template named
 <component>.j2 in a directory named after the configuration version (e.g.
 "templates/1.0/twistframe.j2"). The values substituted in the templates come
 from the built-in defaults, overlaid with the installed configuration unless
 --defaults is given.

 Existing output files are backed up to <file>.bkp before being replaced.
"""

import argparse
import configparser
import os
import shutil
import sys
from configparser import RawConfigParser
from typing import List, Optional

from jinja2 import Template

from twistframe import config
from twistframe.common.version import str_to_version

COMPONENTS = ["twistframe", "logging"]

# Values for the logging component when no installed configuration exists
LOGGING_DEFAULTS = {
    "logging": {"version": "1.0"},
    "loggers": {"keys": "root,twistframe"},
    "handlers": {"keys": "consoleHandler"},
    "formatters": {"keys": "formatter"},
    "formatter_formatter": {
        "format": "%(asctime)s.%(msecs)03d - %(name)s - %(levelname)s - %(message)s",
        "datefmt": "%Y-%m-%d %H:%M:%S",
    },
    "logger_root": {"level": "INFO", "handlers": "consoleHandler"},
    "handler_consoleHandler": {
        "class": "StreamHandler",
        "level": "INFO",
        "formatter": "formatter",
        "args": "(sys.stderr,)",
    },
    "logger_twistframe": {"level": "INFO", "qualname": "twistframe", "handlers": ""},
}


def default_config() -> RawConfigParser:
    """Build the intermediary representation holding the built-in defaults"""

    c = configparser.RawConfigParser()
    c.read_dict(config.DEFAULTS)
    c.read_dict(LOGGING_DEFAULTS)
    return c


def installed_config(base: RawConfigParser) -> RawConfigParser:
    """Overlay the installed configuration of every component on top of base"""

    for component in COMPONENTS:
        installed = config.get_config(component)
        for section in installed.sections():
            if not base.has_section(section):
                base.add_section(section)
            for option, value in installed.items(section):
                base.set(section, option, value)
    return base


def output_component(component: str, c: RawConfigParser, template: str, outfile: str) -> bool:
    """
    Output the configuration file for a component
    """

    if os.path.exists(outfile):
        try:
            shutil.copyfile(outfile, outfile + ".bkp")
        except Exception as e:
            print(f"Could not create backup file {outfile + '.bkp'}, aborting: {e}")
            return False

    print(f"Writing {component} configuration to {outfile}")

    with open(template, "r", encoding="utf-8") as tf:
        t = tf.read()

    r = Template(t).render(c)

    with open(outfile, "w", encoding="utf-8") as o:
        print(r, file=o)

    return True


def output(components: List[str], c: RawConfigParser, templates: str, outdir: str) -> List[str]:
    """
    Output the requested files using a template and return the written paths
    """

    # Check that there are templates for all components before writing anything
    found = {}
    for component in components:
        version = c[component]["version"].strip('" ')
        if str_to_version(version) is None:
            raise Exception(f"Invalid version {version} for component {component}")
        t = os.path.join(templates, version, f"{component}.j2")
        if not os.path.exists(t):
            raise Exception(f"Could not find template {t}")
        found[component] = t

    written = []
    for component, t in found.items():
        outfile = os.path.join(outdir, f"{component}.conf")
        if output_component(component, c, t, outfile):
            written.append(outfile)
    return written


def main(argv: Optional[List[str]] = None) -> None:
    parser = argparse.ArgumentParser(description="Write the twistframe configuration files")

    parser.add_argument(
        "--out",
        help="Output directory where to put the generated files. If the output "
        "files exist, backup files are created to preserve the previous content.",
        default=".",
    )

    parser.add_argument(
        "--templates",
        help="Directory containing the configuration templates, one directory per version",
        default=config.TEMPLATES_DIR,
    )

    parser.add_argument(
        "--defaults",
        help="Use the built-in default values for all options, ignoring the installed configuration",
        action="store_true",
    )

    parser.add_argument(
        "--component",
        help="Generate only the configuration of the given component. Can be provided multiple times",
        choices=COMPONENTS,
        default=[],
        action="append",
    )

    args = parser.parse_args(argv)

    c = default_config()
    if not args.defaults:
        c = installed_config(c)

    if not os.path.isdir(args.out):
        print(f"Output directory {args.out} does not exist")
        sys.exit(1)

    try:
        output(args.component or COMPONENTS, c, args.templates, args.out)
    except Exception as e:
        print(f"Could not write configuration: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
