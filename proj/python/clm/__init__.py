"""Codebookless Gaussian image classification toolkit."""

from ._clm import *  # noqa: F401,F403
