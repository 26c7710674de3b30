"""Decode every generated symbol with an independent, conformant reader."""

import numpy as np
import pytest

from cbrn import qr

cv2 = pytest.importorskip("cv2")

from test_qr import ALL_LABELS  # noqa: E402


def decode(matrix) -> str:
    pattern = qr.render(matrix, 8)
    image = ((1 - pattern.bits) * 255).astype(np.uint8)
    image = np.pad(image, 32, constant_values=255)  # quiet zone for the detector
    text, _, _ = cv2.QRCodeDetector().detectAndDecode(image)
    return text


@pytest.mark.parametrize("label", ALL_LABELS)
def test_reader_decodes_label(label):
    assert decode(qr.encode_label(label)) == label


@pytest.mark.parametrize("mask", range(8))
def test_reader_decodes_every_mask(mask):
    assert decode(qr.encode_label("red", mask=mask)) == "red"


def test_reader_decodes_full_capacity():
    label = "x" * 53
    assert decode(qr.encode_label(label)) == label
