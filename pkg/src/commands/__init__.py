"""
Command layer: one handler per CLI subcommand
"""

from .green_commands import cmd_green_probe
from .intersect_commands import cmd_intersect
from .lattice_commands import cmd_lattice
from .rho_commands import cmd_rho

COMMANDS = {
    "intersect": cmd_intersect,
    "green-probe": cmd_green_probe,
    "lattice": cmd_lattice,
    "rho": cmd_rho,
}

__all__ = ["COMMANDS", "cmd_intersect", "cmd_green_probe", "cmd_lattice", "cmd_rho"]
