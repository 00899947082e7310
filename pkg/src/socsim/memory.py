"""Word-addressed little-endian slave storage."""
from __future__ import annotations

FULL_WORD = 0b1111


def byte_mask(byte_enable: int) -> int:
    """Expand a 4-bit byte-enable into a 32-bit data mask."""
    mask = 0
    for lane in range(4):
        if byte_enable >> lane & 1:
            mask |= 0xFF << (8 * lane)
    return mask


class SlaveMemory:
    """Zero-initialised byte image of one slave."""

    def __init__(self, size: int):
        self.data = bytearray(size)

    def __len__(self):
        return len(self.data)

    def read_word(self, offset: int) -> int:
        return int.from_bytes(self.data[offset:offset + 4], "little")

    def write_word(self, offset: int, value: int, byte_enable: int = FULL_WORD):
        if byte_enable == FULL_WORD:
            self.data[offset:offset + 4] = (value & 0xFFFF_FFFF).to_bytes(4, "little")
            return
        mask = byte_mask(byte_enable)
        old = self.read_word(offset)
        new = (old & ~mask) | (value & mask)
        self.data[offset:offset + 4] = (new & 0xFFFF_FFFF).to_bytes(4, "little")

    def image(self) -> bytes:
        return bytes(self.data)
