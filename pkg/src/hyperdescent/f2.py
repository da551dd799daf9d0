"""GF(2) linear algebra on int bitsets (bit i = coordinate i)."""

from __future__ import annotations

from typing import Sequence


def bits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b & 1:
            out |= 1 << i
    return out


def int_to_bits(vec: int, n: int) -> tuple[int, ...]:
    return tuple((vec >> i) & 1 for i in range(n))


def concat(vectors: Sequence[tuple[int, int]]) -> int:
    """Concatenate (value, width) blocks into one bitset."""
    out, shift = 0, 0
    for vec, width in vectors:
        out |= vec << shift
        shift += width
    return out


class Echelon:
    """Incrementally built reduced basis of a subspace, keyed by pivot bit."""

    def __init__(self, vectors: Sequence[int] = ()):
        self.pivots: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def reduce(self, vec: int) -> int:
        for pivot, row in self.pivots.items():
            if (vec >> pivot) & 1:
                vec ^= row
        return vec

    def add(self, vec: int) -> bool:
        """Insert vec; return False if it was already in the span."""
        vec = self.reduce(vec)
        if vec == 0:
            return False
        pivot = vec.bit_length() - 1
        for key, row in list(self.pivots.items()):
            if (row >> pivot) & 1:
                self.pivots[key] = row ^ vec
        self.pivots[pivot] = vec
        return True

    def __contains__(self, vec: int) -> bool:
        return self.reduce(vec) == 0

    def __len__(self) -> int:
        return len(self.pivots)

    def basis(self) -> list[int]:
        return [self.pivots[k] for k in sorted(self.pivots)]


def rank(vectors: Sequence[int]) -> int:
    return len(Echelon(vectors))


def in_span(vec: int, vectors: Sequence[int]) -> bool:
    return vec in Echelon(vectors)


def kernel(images: Sequence[int]) -> list[int]:
    """Basis of {x in F2^n : sum x_i images[i] = 0}, as bitsets over range(n)."""
    # rows carry (image, combination) and are eliminated on the image part
    rows: list[tuple[int, int]] = []
    out: list[int] = []
    for i, img in enumerate(images):
        comb = 1 << i
        for r_img, r_comb in rows:
            if img & (1 << (r_img.bit_length() - 1)):
                img ^= r_img
                comb ^= r_comb
        if img == 0:
            out.append(comb)
        else:
            rows.append((img, comb))
    return out


def express(vec: int, vectors: Sequence[int]) -> int | None:
    """Bitset c with sum c_i vectors[i] = vec, or None when vec is outside the span."""
    rows: list[tuple[int, int]] = []
    for i, v in enumerate(vectors):
        comb = 1 << i
        for r_v, r_comb in rows:
            if v & (1 << (r_v.bit_length() - 1)):
                v ^= r_v
                comb ^= r_comb
        if v:
            rows.append((v, comb))
    comb = 0
    for r_v, r_comb in rows:
        if vec & (1 << (r_v.bit_length() - 1)):
            vec ^= r_v
            comb ^= r_comb
    return comb if vec == 0 else None


def span_equal(a: Sequence[int], b: Sequence[int]) -> bool:
    ea = Echelon(a)
    return len(ea) == rank(b) and all(v in ea for v in b)
