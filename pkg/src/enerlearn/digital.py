"""Bit-level energy accounting for the digital prediction loop.

The model prices every memory operation at the per-bit limit kT ln 2:
erasing a bit costs it, writing known content into an unknown cell costs
it, randomizing a cell is free, and a correctly predicted bit can be
converted into that same amount of usable energy.  Logically reversible
steps are energy-neutral, so the subtract/restore pair that compares an
external word stream against an internal model stream contributes nothing
to the ledger; only the per-bit extraction/erasure of the residual does.

All equalities are exact (adiabatic limit): the ledger's joule total is
reconstructed from its counters, so it can never drift from
(extracted - erased - written) * kB * T * ln 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .csvio import read_rows, write_rows

BOLTZMANN_J_PER_K = 1.380649e-23  # exact (2019 SI)
LN2 = math.log(2.0)

ERASE = "erase"
WRITE_KNOWN = "write_known"
RANDOMIZE = "randomize"
EXTRACT_PREDICTED = "extract_predicted"
TRANSACTION_KINDS = (ERASE, WRITE_KNOWN, RANDOMIZE, EXTRACT_PREDICTED)


@dataclass(frozen=True)
class BitWord:
    """An unsigned integer constrained to a fixed bit width."""

    value: int
    width: int = 8

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width must be positive, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} out of range for width {self.width}")

    def bits_lsb_first(self) -> np.ndarray:
        return np.array([(self.value >> i) & 1 for i in range(self.width)], dtype=np.uint8)


@dataclass(frozen=True)
class EnergyLedger:
    """Running energy account at a fixed temperature.

    ``joules`` is derived from the counters, never accumulated, so the
    invariant joules == (extracted - erased - written) * kB * T * ln2 holds
    to full floating precision after any sequence of transactions.
    """

    temperature: float = 300.0
    n_extracted: int = 0
    n_erased: int = 0
    n_written: int = 0
    n_randomized: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        for name in ("n_extracted", "n_erased", "n_written", "n_randomized"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def bit_energy(self) -> float:
        """Energy per bit at this temperature: kB * T * ln 2."""
        return BOLTZMANN_J_PER_K * self.temperature * LN2

    @property
    def joules(self) -> float:
        return (self.n_extracted - self.n_erased - self.n_written) * self.bit_energy


def ledger_transact(ledger: EnergyLedger, kind: str, n_bits: int) -> EnergyLedger:
    """Apply one of the four priced memory operations to ``n_bits`` bits."""
    if n_bits < 0:
        raise ValueError(f"n_bits must be nonnegative, got {n_bits}")
    if kind == ERASE:
        return replace(ledger, n_erased=ledger.n_erased + n_bits)
    if kind == WRITE_KNOWN:
        return replace(ledger, n_written=ledger.n_written + n_bits)
    if kind == RANDOMIZE:
        return replace(ledger, n_randomized=ledger.n_randomized + n_bits)
    if kind == EXTRACT_PREDICTED:
        return replace(ledger, n_extracted=ledger.n_extracted + n_bits)
    raise ValueError(f"unknown transaction kind {kind!r}; expected one of {TRANSACTION_KINDS}")


@dataclass(frozen=True)
class ResidualStream:
    """A sequence of 0/1 residual bits."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if bits.size and bits.max() > 1:
            raise ValueError("bits must contain only 0 and 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "ResidualStream":
        if text and not set(text) <= {"0", "1"}:
            raise ValueError("bitstream text must contain only '0' and '1'")
        return cls(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __len__(self) -> int:
        return self.bits.size


def reversible_subtract(F: BitWord, f: BitWord) -> tuple[BitWord, BitWord]:
    """Map (F, f) -> (F - f mod 2^w, f); a bijection on word pairs.

    The second output keeps the subtrahend, so no information is destroyed
    and the operation is priced at zero energy.
    """
    if F.width != f.width:
        raise ValueError(f"width mismatch: {F.width} vs {f.width}")
    diff = (F.value - f.value) % (1 << F.width)
    return BitWord(diff, F.width), f


def reversible_restore(diff: BitWord, keep: BitWord) -> tuple[BitWord, BitWord]:
    """Exact inverse of reversible_subtract: (diff, keep) -> (F, f)."""
    if diff.width != keep.width:
        raise ValueError(f"width mismatch: {diff.width} vs {keep.width}")
    F = (diff.value + keep.value) % (1 << diff.width)
    return BitWord(F, diff.width), keep


def extract_from_residual(
    stream: ResidualStream, ledger: EnergyLedger, rng_seed: int
) -> tuple[ResidualStream, EnergyLedger]:
    """Run the constant-zero predictor over a residual stream.

    Per bit: a 0 is a correct prediction and is extracted (+kT ln2); a 1 is
    a misprediction and the cell must be erased before reuse (-kT ln2).
    Either way the cell is left holding a fresh random bit, so the output
    carries no information and the stream's usable content has been turned
    into energy.  The output generator is seeded, consumed in stream order.
    """
    n = len(stream)
    if n == 0:
        return ResidualStream(np.empty(0, dtype=np.uint8)), ledger
    n_wrong = int(stream.bits.sum())
    n_correct = n - n_wrong
    ledger = ledger_transact(ledger, EXTRACT_PREDICTED, n_correct)
    ledger = ledger_transact(ledger, ERASE, n_wrong)
    out = np.random.default_rng(rng_seed).integers(0, 2, size=n, dtype=np.uint8)
    return ResidualStream(out), ledger


def run_digital_loop(
    F_stream, model, ledger: EnergyLedger, rng_seed: int
) -> tuple[float, EnergyLedger]:
    """Match an external word stream against an internal model stream.

    Each pair goes through the reversible subtraction stage (energy
    neutral), and the residual difference bits are fed to the extractor.
    A perfect model yields an all-zero residual, hence the maximum energy
    gain of width * kT ln2 per word; each residual 1-bit instead costs one
    erasure.  Returns the net energy over the run and the updated ledger.
    """
    F_stream = list(F_stream)
    model = list(model)
    if len(F_stream) != len(model):
        raise ValueError(f"stream length mismatch: {len(F_stream)} vs {len(model)}")
    start_joules = ledger.joules
    if not F_stream:
        return 0.0, ledger
    widths = {w.width for w in F_stream} | {w.width for w in model}
    if len(widths) != 1:
        raise ValueError(f"streams must share one width, got {sorted(widths)}")
    width = widths.pop()

    diffs = np.array(
        [reversible_subtract(F, f)[0].value for F, f in zip(F_stream, model)],
        dtype=np.uint64,
    )
    # residual bits, LSB first within each word, words in stream order
    bit_positions = np.arange(width, dtype=np.uint64)
    bits = ((diffs[:, None] >> bit_positions) & 1).astype(np.uint8).reshape(-1)
    _, ledger = extract_from_residual(ResidualStream(bits), ledger, rng_seed)
    return ledger.joules - start_joules, ledger


# --- file formats ---------------------------------------------------------


def save_bitstream(stream: ResidualStream, path) -> None:
    """Write a stream as one line of 0/1 characters."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(stream.to_string() + "\n")


def load_bitstream(path) -> ResidualStream:
    text = Path(path).read_text().strip()
    return ResidualStream.from_string(text)


def save_wordstream(words, path) -> None:
    """Write words as a 'width=N' header line plus hex values."""
    words = list(words)
    if not words:
        raise ValueError("word stream is empty")
    widths = {w.width for w in words}
    if len(widths) != 1:
        raise ValueError(f"words must share one width, got {sorted(widths)}")
    width = widths.pop()
    digits = (width + 3) // 4
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = " ".join(format(w.value, f"0{digits}x") for w in words)
    path.write_text(f"width={width}\n{body}\n")


def load_wordstream(path) -> list[BitWord]:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("width="):
        raise ValueError(f"word stream file {path} must start with 'width=N'")
    width = int(lines[0].split("=", 1)[1])
    tokens = " ".join(lines[1:]).split()
    return [BitWord(int(tok, 16), width) for tok in tokens]


def save_ledger_csv(ledger: EnergyLedger, path) -> None:
    write_rows(
        path,
        ["temperature_K", "joules", "n_extracted", "n_erased", "n_written", "n_randomized"],
        [[
            ledger.temperature,
            ledger.joules,
            ledger.n_extracted,
            ledger.n_erased,
            ledger.n_written,
            ledger.n_randomized,
        ]],
    )


def load_ledger_csv(path) -> EnergyLedger:
    header, rows = read_rows(path)
    if len(rows) != 1:
        raise ValueError(f"ledger file {path} must contain exactly one row")
    row = dict(zip(header, rows[0]))
    return EnergyLedger(
        temperature=float(row["temperature_K"]),
        n_extracted=int(row["n_extracted"]),
        n_erased=int(row["n_erased"]),
        n_written=int(row["n_written"]),
        n_randomized=int(row["n_randomized"]),
    )
