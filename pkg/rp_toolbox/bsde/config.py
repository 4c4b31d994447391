# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class Config:
    def __init__(self):
        # Scalar fixed point y = E[Y'] + g(t, y + x, z) dt
        self.fixed_point_tolerance = 1e-12
        self.max_iterations = 100
        # Largest admissible dt * C_Lip
        self.contraction_bound = 0.5
        # Default epsilon of the epsilon-optimal stopping time
        self.epsilon = 1e-6
        # Grid conjugate: points per axis, +inf surrogate threshold
        self.conjugate_grid_points = 201
        self.conjugate_cap = 1e6
        # Points per axis of the (beta, mu) grid searched by optimal_control
        self.control_grid_points = 41
        # Random triples drawn by the driver flag checks
        self.flag_samples = 200
        self.flag_tolerance = 1e-9


# Singleton instance to share globally
config = Config()
