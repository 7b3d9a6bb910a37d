"""Shared cached builders so expensive state spaces are enumerated once."""

import functools

from polymix.generator import build_generator
from polymix.paths import enumerate_state_space


@functools.lru_cache(maxsize=None)
def get_index(L, d):
    return enumerate_state_space(L, d)


@functools.lru_cache(maxsize=None)
def get_gen(L, d):
    return build_generator(get_index(L, d))
