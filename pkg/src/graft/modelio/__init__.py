"""Model I/O: Ecore metamodel import, XMI instance import/export, DOT export."""

from .dot import LayoutConfig, export_dot
from .ecore import import_ecore, load_schema
from .xmi import export_state_machine_xmi, import_xmi, machine_signature

__all__ = [
    "LayoutConfig",
    "export_dot",
    "export_state_machine_xmi",
    "import_ecore",
    "import_xmi",
    "load_schema",
    "machine_signature",
]
