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

import numpy as np
import pytest
from core.api.law import ModeSet, TrajectoryLaw
from core.physics.catalog import parse_state_spec
from core.physics.states import constant_state


class UniformLaw(TrajectoryLaw):
    """Unit speed along every coordinate axis, whatever the state."""

    def get_law_name(self) -> str:
        return "uniform"

    def uses_frame(self) -> bool:
        return False

    def modes(self, state, chart, q, reference=None, connection=True) -> ModeSet:
        return ModeSet(radicands=np.ones(state.n), directions=np.eye(state.n))

    def radicands(self, state, chart, q):
        q = np.asarray(q, dtype=float)
        return np.ones(q.shape), np.zeros(q.shape[:-1], dtype=bool)


@pytest.fixture
def ground():
    return parse_state_spec("ho:k=0,omega=1")


@pytest.fixture
def two_oscillators():
    return parse_state_spec("product(ho:k=0,omega=1, ho:k=0,omega=1)")


@pytest.fixture
def superposition():
    return parse_state_spec("sup:levels=0|1,weights=1|1")


@pytest.fixture
def composed():
    return parse_state_spec("compose(sup:levels=0|1,weights=1|1, sup:levels=0|2,weights=1|1)")


@pytest.fixture
def uniform_law():
    return UniformLaw()


@pytest.fixture
def flat_plane():
    return constant_state(n=2, value=0.5)
