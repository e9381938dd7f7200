"""
OrliczLab Version Information
Central version management; reports embed the tool name and version.
"""

from typing import Dict, Optional, Union

# Semantic Versioning: MAJOR.MINOR.PATCH
VERSION = "1.0.0"

VERSION_INFO: Dict[str, Union[int, Optional[str]]] = {
    "major": 1,
    "minor": 0,
    "patch": 0,
    "pre_release": None,
    "build": None
}

APP_NAME = "OrliczLab"
APP_DESCRIPTION = "Numerical laboratory for Orlicz function spaces and Cesaro boundedness"


def get_version() -> str:
    """Get the current version string."""
    return VERSION


def get_full_version() -> str:
    """Get version with pre-release and build info if available."""
    version = VERSION
    if VERSION_INFO["pre_release"]:
        version += f"-{VERSION_INFO['pre_release']}"
    if VERSION_INFO["build"]:
        version += f"+{VERSION_INFO['build']}"
    return version


def get_app_info() -> str:
    """Application name and version, e.g. "OrliczLab v1.0.0"."""
    return f"{APP_NAME} v{get_version()}"


def get_tool_info() -> Dict[str, str]:
    """The ``tool`` block written into every report."""
    return {"name": APP_NAME, "version": get_full_version()}
