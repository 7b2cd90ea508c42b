"""Module checking of pushdown multi-agent systems against ATL specifications."""
from .checker import Verdict, model_check, module_check, oracle_module_check
from .logic import parse_formula
from .system_model import Pms, load_pms, parse_pms

__all__ = ["Pms", "Verdict", "load_pms", "model_check", "module_check",
           "oracle_module_check", "parse_formula", "parse_pms"]
__version__ = "0.1.0"
