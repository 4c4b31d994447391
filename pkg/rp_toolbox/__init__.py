# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later
