#############################################################################
##
## Copyright (C) 2025 Killian-W.
## All rights reserved.
##
## This file is part of the Qtraj project.
##
## Licensed under the MIT License.
## You may obtain a copy of the License at:
##     https://opensource.org/licenses/MIT
##
## This software is provided "as is," without warranty of any kind.
##
#############################################################################

import os
import platform
import sys

import core.constants as constants  # type: ignore
import cpuinfo
import numpy as np
import psutil
import scipy


class SystemInfo:
    def get_system_info(self, workers: int = 1):
        return {
            "Operating System": self.get_os_info(),
            "Processor": self.get_cpu_info(),
            "Memory": self.get_memory_info(),
            constants.APP_TITLE: self.get_qtraj_info(workers),
        }

    @staticmethod
    def get_qtraj_info(workers: int):
        return {
            "Version": constants.APP_VERSION,
            "Maintainer": constants.MAINTAINER,
            "Workers": workers,
            "Python Version": sys.version.split()[0],
            "NumPy Version": np.__version__,
            "SciPy Version": scipy.__version__,
        }

    @staticmethod
    def get_cpu_info():
        cpu = cpuinfo.get_cpu_info()
        frequency = psutil.cpu_freq()
        return {
            "Vendor": cpu.get("vendor_id_raw", "Unknown"),
            "Brand": cpu.get("brand_raw", "Unknown"),
            "Speed": f"{frequency.max:.2f} MHz" if frequency else "Unknown",
            "Cores": psutil.cpu_count(logical=False),
            "Threads": psutil.cpu_count(logical=True),
        }

    def get_memory_info(self):
        svmem = psutil.virtual_memory()
        return {
            "Total": self.get_size(svmem.total),
            "In Use": self.get_size(svmem.used),
            "Available": self.get_size(svmem.available),
        }

    @staticmethod
    def get_os_info():
        return {
            "Platform": platform.platform(),
            "Architecture": platform.machine(),
            "CPU Affinity": (
                len(os.sched_getaffinity(0))
                if hasattr(os, "sched_getaffinity")
                else "Unknown"
            ),
        }

    @staticmethod
    def get_size(bytes, suffix="B"):
        factor = 1024
        for unit in ["", "K", "M", "G", "T", "P"]:
            if bytes < factor:
                return f"{bytes:.2f}{unit}{suffix}"
            bytes /= factor
        return f"{bytes:.2f}Y{suffix}"
