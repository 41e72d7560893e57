"""Shared sidecar fixtures."""

import pytest

from embed_sidecar.encoder import TransformerEncoder


@pytest.fixture(scope="session")
def tiny_encoder() -> TransformerEncoder:
    return TransformerEncoder("test-tiny")
