"""Shared fixtures: canonical instance texts and parse helpers."""

import numpy as np
import pytest

from matchkit import ProblemClass, parse

# 3 students, 4 projects, 2 lecturers; strict lists everywhere
SPAS_TEXT = (
    "3 4 2\n"
    "1: 1 2\n"
    "2: 2 3\n"
    "3: 1 3\n"
    "1: 2: 1 2 3\n"
    "2: 1: 2 1 3\n"
    "1: 1: 1\n"
    "2: 2: 1\n"
    "3: 2: 2\n"
    "4: 1: 2"
)

# same shape but tied student lists and empty lecturer lists
SPA_TIES_TEXT = (
    "3 4 2\n"
    "1: (1 2)\n"
    "2: 2 3\n"
    "3: (1 3)\n"
    "1: 2:\n"
    "2: 1:\n"
    "1: 1: 1\n"
    "2: 2: 1\n"
    "3: 2: 2\n"
    "4: 1: 2"
)

# the classic two-stable-matching marriage instance
SM_TEXT = "2 2\n1: 1 2\n2: 2 1\n1: 1: 2 1\n2: 1: 1 2"

SR_TEXT = "2\n2 \n1"

HA_PAIR_TEXT = "2 2\n1: 1 2\n2: 1 2\n1: 1\n2: 1"

# three applicants fighting over two houses: no popular matching
HA_TRIPLE_TEXT = "3 2\n1: 1 2\n2: 1 2\n3: 1 2\n1: 1\n2: 1"


@pytest.fixture
def spas_instance():
    return parse(SPAS_TEXT, ProblemClass.SPAS)


@pytest.fixture
def spa_ties_instance():
    return parse(SPA_TIES_TEXT, ProblemClass.SPA)


@pytest.fixture
def sm_instance():
    return parse(SM_TEXT, ProblemClass.SM)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def agent_pairs(matching):
    """Matching pairs as sorted (leftIndex, rightIndex) tuples."""
    return sorted((a.index, b.index) for a, b in matching.pairs)
