"""System information recorded alongside every harness report."""

import os
import platform
import shutil
import socket
import subprocess
from typing import Optional


def get_logical_cores() -> int:
    """Get the number of logical cores available to this process.

    This function attempts, in order of preference:
    1. os.sched_getaffinity - honours CPU pinning (Linux)
    2. os.cpu_count - all logical cores
    3. Default fallback of 1

    Returns:
        Logical core count
    """
    try:
        return len(os.sched_getaffinity(0))
    except (AttributeError, OSError):
        pass

    count = os.cpu_count()
    return count if count else 1


def get_computer_name() -> str:
    """Get the computer/hostname.

    Returns:
        Computer name/hostname as string
    """
    try:
        return socket.gethostname()
    except Exception:
        return "unknown_host"


def get_compiler_version(compiler: str) -> Optional[str]:
    """First line of ``<compiler> --version``, or None if the compiler is absent."""
    if shutil.which(compiler) is None:
        return None
    try:
        result = subprocess.run([compiler, "--version"], capture_output=True, text=True, timeout=10)
    except (OSError, subprocess.TimeoutExpired):
        return None
    lines = result.stdout.strip().splitlines()
    return lines[0] if lines else None


def has_openmp_toolchain(compiler: str = "gcc", openmp_flag: str = "-fopenmp") -> bool:
    """Check that ``compiler`` can build an OpenMP program.

    Args:
        compiler: C compiler command
        openmp_flag: Flag enabling OpenMP

    Returns:
        True if a trivial ``#include <omp.h>`` program compiles
    """
    if shutil.which(compiler) is None:
        return False
    program = "#include <omp.h>\nint main(void){return omp_get_max_threads() > 0 ? 0 : 1;}\n"
    try:
        result = subprocess.run(
            [compiler, openmp_flag, "-x", "c", "-", "-o", os.devnull],
            input=program, capture_output=True, text=True, timeout=60,
        )
    except (OSError, subprocess.TimeoutExpired):
        return False
    return result.returncode == 0


def get_system_info(compiler: Optional[str] = None) -> dict:
    """Get the machine description stored in every report.

    Args:
        compiler: Optional compiler command whose version is recorded

    Returns:
        Dictionary with system information
    """
    info = {
        "hostname": get_computer_name(),
        "platform": platform.system(),
        "platform_release": platform.release(),
        "architecture": platform.machine(),
        "python_version": platform.python_version(),
        "logical_cores": get_logical_cores(),
    }
    if compiler:
        info["compiler"] = get_compiler_version(compiler)
    return info
