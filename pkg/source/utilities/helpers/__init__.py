from .load_json_file import load_json
from .system_info import SystemInfo
from .write_json_file import dump_json, to_jsonable, write_json

__all__ = [
    "SystemInfo",
    "dump_json",
    "load_json",
    "to_jsonable",
    "write_json",
]
