# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Test utils."""

__all__ = [
    "BOUNDARY_CONFIG",
    "LINE_CONFIG",
]

BOUNDARY_CONFIG = """\
[problem]
domain = "interval"
lower = 0.0
field = "identity"
solution = [0.0]
lipschitz = 1.0
strong = 1.0

[regularizer]
kernel = "entropy"

[method]
preset = "md"
gamma = 0.1
horizon = 300
init = [0.5]
"""

LINE_CONFIG = """\
[problem]
domain = "polyhedron"
matrix_file = "line.csv"
rhs = [0.0]
field = "shifted_identity"
shift = [-1.0, 0.0]
solution = [0.0, 0.0]
lipschitz = 1.0
strong = 1.0

[regularizer]
kernel = "entropy"

[method]
preset = "md"
gamma = 0.1
horizon = 200
init = [0.1, 1.0]
"""
