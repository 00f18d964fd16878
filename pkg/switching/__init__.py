from switching.bang_bang import (ControlSet, SwitchRecord, hamiltonian, argmax_u, compute_u0,
                                 count_switches, switch_events)

__all__ = [
    "ControlSet", "SwitchRecord", "hamiltonian", "argmax_u", "compute_u0", "count_switches",
    "switch_events",
]
