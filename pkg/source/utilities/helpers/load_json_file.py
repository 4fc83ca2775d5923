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

import json
from typing import Dict


def load_json(file_path: str) -> Dict:
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except FileNotFoundError as e:
        raise FileNotFoundError(f"File not found: {file_path}") from e
    except json.JSONDecodeError as e:
        raise ValueError(
            f"Error parsing JSON file: {file_path} (line {e.lineno}: {e.msg})"
        ) from e

    if not isinstance(data, dict):
        raise ValueError(f"Expected a JSON object at the top of {file_path}")
    return data
