"""Binary file formats: PDF store (RPDF), particle store (RPRT), raw fields (RFLD).

All three formats are self-describing single files with little-endian
integers and IEEE-754 binary64 reals (particle values are binary32 to halve
particle storage; the PDF store keeps full-precision statistics).  RPDF and
RPRT carry a CRC-32C per timestep block so payload corruption is
detectable; RPRT embeds a per-region (offset, count) index so one seek
reaches any region's records without scanning the file.

Layout summary (see the project README for the full byte-level reference):

  RPDF: magic, version, grid dims + region extents, variable table, config
        table, T, then per timestep [time, R*C histograms region-major
        config-minor, crc32c].
  RPRT: magic, version, region counts, variable table, T, then per
        timestep [time, N, index table, N fixed-size records, crc32c].
  RFLD: magic, version, dims, per-axis coordinates, variable table, T,
        then per timestep [time, V dense x-fastest f64 arrays].
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    ChecksumMismatch,
    TruncatedFile,
    UnknownRegion,
    UnknownTimestep,
    UnsupportedVersion,
)
from .grid import RectilinearAxes, RegionGrid
from .histogram import BinEdges, BinningKind, BinningStrategy, RegionalHistogram, VariableStats
from .particles import ParticleIndexTable, ParticleRecord
from .summarizer import PdfConfig, TimestepSummary

PDF_MAGIC = b"RPDF"
PARTICLE_MAGIC = b"RPRT"
RAW_MAGIC = b"RFLD"
FORMAT_VERSION = 1

_STRATEGY_TAGS = {
    BinningKind.STURGES: 0,
    BinningKind.SCOTT: 1,
    BinningKind.FREEDMAN_DIACONIS: 2,
    BinningKind.FIXED: 3,
}
_TAG_STRATEGIES = {v: k for k, v in _STRATEGY_TAGS.items()}


# ---------------------------------------------------------------------------
# CRC-32C (Castagnoli), table-driven, with an optional numba fast path.

def _make_crc_table() -> np.ndarray:
    poly = 0x82F63B78
    table = np.empty(256, dtype=np.uint32)
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ poly if c & 1 else c >> 1
        table[i] = c
    return table


_CRC_TABLE = _make_crc_table()
_crc_kernel = None


def _crc_python(data: bytes, crc: int) -> int:
    table = _CRC_TABLE
    for b in data:
        crc = int(table[(crc ^ b) & 0xFF]) ^ (crc >> 8)
    return crc


def _get_crc_kernel():
    global _crc_kernel
    if _crc_kernel is None:
        try:
            from numba import njit

            table = _CRC_TABLE

            @njit(cache=True)
            def kernel(buf, crc):
                c = np.uint32(crc)
                for i in range(buf.size):
                    c = table[(c ^ buf[i]) & np.uint32(0xFF)] ^ (c >> np.uint32(8))
                return c

            kernel(np.zeros(1, dtype=np.uint8), np.uint32(0))
            _crc_kernel = lambda data, crc: int(kernel(np.frombuffer(data, np.uint8), np.uint32(crc)))
        except Exception:
            _crc_kernel = _crc_python
    return _crc_kernel


def crc32c(data) -> int:
    """CRC-32C of a bytes-like object (init and final xor 0xFFFFFFFF)."""
    crc = _get_crc_kernel()(bytes(data), 0xFFFFFFFF)
    return (crc ^ 0xFFFFFFFF) & 0xFFFFFFFF


# ---------------------------------------------------------------------------
# Little-endian read/write plumbing.

class ByteWriter:
    def __init__(self):
        self.buf = bytearray()

    def u8(self, v):
        self.buf += struct.pack("<B", v)

    def u16(self, v):
        self.buf += struct.pack("<H", v)

    def u32(self, v):
        self.buf += struct.pack("<I", v)

    def u64(self, v):
        self.buf += struct.pack("<Q", v)

    def f64(self, v):
        self.buf += struct.pack("<d", v)

    def raw(self, b):
        self.buf += b

    def string(self, s: str):
        data = s.encode("utf-8")
        self.u16(len(data))
        self.raw(data)


class ByteReader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.offset = offset

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise TruncatedFile(f"need {n} bytes at offset {self.offset}, have {len(self.data)}")
        out = self.data[self.offset : self.offset + n]
        self.offset += n
        return out

    def u8(self):
        return struct.unpack("<B", self.take(1))[0]

    def u16(self):
        return struct.unpack("<H", self.take(2))[0]

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def u64(self):
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self):
        return struct.unpack("<d", self.take(8))[0]

    def string(self) -> str:
        n = self.u16()
        return self.take(n).decode("utf-8")

    def array(self, dtype: str, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).copy()


class CountingFile:
    """File wrapper recording every read's (offset, length) for I/O tests."""

    def __init__(self, f):
        self.f = f
        self.bytes_read = 0
        self.reads: list[tuple[int, int]] = []

    def reset(self):
        self.bytes_read = 0
        self.reads = []

    def read(self, n=-1):
        pos = self.f.tell()
        out = self.f.read(n)
        self.bytes_read += len(out)
        self.reads.append((pos, len(out)))
        return out

    def seek(self, *args):
        return self.f.seek(*args)

    def tell(self):
        return self.f.tell()

    def close(self):
        return self.f.close()


def _read_exact(f, n: int) -> bytes:
    out = f.read(n)
    if len(out) != n:
        raise TruncatedFile(f"wanted {n} bytes, got {len(out)}")
    return out


# ---------------------------------------------------------------------------
# Shared header pieces.

def _write_variable_table(w: ByteWriter, variables):
    w.u16(len(variables))
    for name, unit in variables:
        w.string(name)
        w.string(unit)


def _read_variable_table(r: ByteReader):
    count = r.u16()
    return [(r.string(), r.string()) for _ in range(count)]


def _write_grid(w: ByteWriter, grid: RegionGrid):
    for d in grid.dims:
        w.u32(d)
    for c in grid.region_counts:
        w.u32(c)
    for axis_extents in grid.region_extents:
        for lo, hi in axis_extents:
            w.u32(lo)
            w.u32(hi)


def _read_grid(r: ByteReader) -> RegionGrid:
    dims = tuple(r.u32() for _ in range(3))
    counts = tuple(r.u32() for _ in range(3))
    extents = tuple(
        tuple((r.u32(), r.u32()) for _ in range(counts[a])) for a in range(3)
    )
    return RegionGrid(dims, counts, extents)


def _write_config(w: ByteWriter, cfg: PdfConfig):
    w.u8(cfg.ndims)
    for v in cfg.var_ids:
        w.u16(v)
    w.u8(_STRATEGY_TAGS[cfg.strategy.kind])
    w.u32(cfg.strategy.max_bins)
    if cfg.condition is None:
        w.u8(0)
    else:
        w.u8(1)
        w.u16(cfg.condition[0])
        w.f64(cfg.condition[1])
        w.f64(cfg.condition[2])


def _read_config(r: ByteReader) -> PdfConfig:
    ndims = r.u8()
    var_ids = tuple(r.u16() for _ in range(ndims))
    kind = _TAG_STRATEGIES[r.u8()]
    max_bins = r.u32()
    condition = None
    if r.u8():
        condition = (r.u16(), r.f64(), r.f64())
    return PdfConfig(var_ids=var_ids, strategy=BinningStrategy(kind, max_bins), condition=condition)


def _write_stats(w: ByteWriter, st: VariableStats):
    w.u64(st.count)
    if st.count == 0:
        for _ in range(4):
            w.f64(0.0)
    else:
        w.f64(st.min)
        w.f64(st.max)
        w.f64(st.sum)
        w.f64(st.sum_sq)


def _read_stats(r: ByteReader) -> VariableStats:
    count = r.u64()
    mn, mx, sm, ssq = (r.f64() for _ in range(4))
    if count == 0:
        return VariableStats()
    return VariableStats(count=count, min=mn, max=mx, sum=sm, sum_sq=ssq)


def _write_histogram(w: ByteWriter, h: RegionalHistogram):
    for e in h.edges:
        w.f64(e.min)
        w.f64(e.max)
        w.u32(e.nbins)
    w.raw(h.counts.astype("<u8").tobytes())
    w.u64(h.out_of_range)
    w.u64(h.invalid)
    w.u64(h.sample_count)
    for st in h.stats:
        _write_stats(w, st)


def _read_histogram(r: ByteReader, var_ids: tuple[int, ...]) -> RegionalHistogram:
    edges = []
    size = 1
    for _ in var_ids:
        mn, mx = r.f64(), r.f64()
        nbins = r.u32()
        edges.append(BinEdges(mn, mx, nbins))
        size *= nbins
    counts = r.array("<u8", size).astype(np.int64)
    out_of_range = r.u64()
    invalid = r.u64()
    sample_count = r.u64()
    stats = tuple(_read_stats(r) for _ in var_ids)
    return RegionalHistogram(
        var_ids=var_ids,
        edges=tuple(edges),
        counts=counts,
        out_of_range=out_of_range,
        invalid=invalid,
        sample_count=sample_count,
        stats=stats,
    )


# ---------------------------------------------------------------------------
# PDF store (RPDF).

@dataclass
class PdfStoreData:
    grid: RegionGrid
    variables: list[tuple[str, str]]
    configs: list[PdfConfig]
    summaries: list[TimestepSummary]

    def variable_id(self, name: str) -> int:
        for i, (n, _) in enumerate(self.variables):
            if n == name:
                return i
        raise KeyError(name)


def write_pdf_store(path, grid: RegionGrid, variables, configs: list[PdfConfig], summaries: list[TimestepSummary]):
    """Serialize summaries; every summary must cover all regions of the grid."""
    regions = list(range(grid.region_count))
    for t, summary in enumerate(summaries):
        if summary.regions() != regions:
            raise ValueError(f"timestep {t} does not cover all {grid.region_count} regions")
    w = ByteWriter()
    w.raw(PDF_MAGIC)
    w.u32(FORMAT_VERSION)
    _write_grid(w, grid)
    _write_variable_table(w, variables)
    w.u16(len(configs))
    for cfg in configs:
        _write_config(w, cfg)
    w.u32(len(summaries))
    for summary in summaries:
        block = ByteWriter()
        block.f64(summary.time)
        for region in regions:
            hists = summary.histograms[region]
            if len(hists) != len(configs):
                raise ValueError(f"region {region}: {len(hists)} histograms for {len(configs)} configs")
            for h in hists:
                _write_histogram(block, h)
        w.raw(block.buf)
        w.u32(crc32c(block.buf))
    Path(path).write_bytes(bytes(w.buf))


def read_pdf_store(path) -> PdfStoreData:
    data = Path(path).read_bytes()
    r = ByteReader(data)
    if r.take(4) != PDF_MAGIC:
        raise BadMagic(f"{path} is not a PDF store")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"PDF store version {version}")
    grid = _read_grid(r)
    variables = _read_variable_table(r)
    configs = [_read_config(r) for _ in range(r.u16())]
    n_steps = r.u32()
    summaries = []
    for _ in range(n_steps):
        block_start = r.offset
        time = r.f64()
        summary = TimestepSummary(time=time)
        for region in range(grid.region_count):
            summary.histograms[region] = [
                _read_histogram(r, cfg.var_ids) for cfg in configs
            ]
        computed = crc32c(data[block_start : r.offset])
        stored = r.u32()
        if stored != computed:
            raise ChecksumMismatch(f"timestep block at offset {block_start}")
        summaries.append(summary)
    return PdfStoreData(grid=grid, variables=variables, configs=configs, summaries=summaries)


# ---------------------------------------------------------------------------
# Particle store (RPRT).

def record_dtype(n_variables: int) -> np.dtype:
    return np.dtype(
        [("id", "<u8"), ("pos", "<f8", (3,)), ("values", "<f4", (n_variables,))]
    )


def record_size(n_variables: int) -> int:
    return 8 + 24 + 4 * n_variables


@dataclass
class ParticleTimestep:
    time: float
    table: ParticleIndexTable
    records: list[ParticleRecord]


def _records_to_array(records: list[ParticleRecord], n_variables: int) -> np.ndarray:
    arr = np.empty(len(records), dtype=record_dtype(n_variables))
    arr["id"] = [p.id for p in records]
    arr["pos"] = [p.pos for p in records]
    arr["values"] = [p.values for p in records]
    return arr


def _array_to_records(arr: np.ndarray) -> list[ParticleRecord]:
    ids = arr["id"].tolist()
    pos = arr["pos"].tolist()
    values = arr["values"].tolist()
    return [
        ParticleRecord(id=i, pos=tuple(p), values=tuple(v))
        for i, p, v in zip(ids, pos, values)
    ]


def write_particle_store(path, region_counts, variables, steps: list[ParticleTimestep]):
    w = ByteWriter()
    w.raw(PARTICLE_MAGIC)
    w.u32(FORMAT_VERSION)
    for c in region_counts:
        w.u32(c)
    _write_variable_table(w, variables)
    w.u32(len(steps))
    r_total = region_counts[0] * region_counts[1] * region_counts[2]
    for step in steps:
        if step.table.region_count != r_total:
            raise ValueError(f"index table covers {step.table.region_count} regions, grid has {r_total}")
        step.table.validate(len(step.records))
        block = ByteWriter()
        block.f64(step.time)
        block.u64(len(step.records))
        pairs = np.empty(2 * r_total, dtype="<u8")
        pairs[0::2] = step.table.offsets
        pairs[1::2] = step.table.counts
        block.raw(pairs.tobytes())
        block.raw(_records_to_array(step.records, len(variables)).tobytes())
        w.raw(block.buf)
        w.u32(crc32c(block.buf))
    Path(path).write_bytes(bytes(w.buf))


@dataclass
class _StepLayout:
    time: float
    n_records: int
    table: ParticleIndexTable
    block_start: int
    records_base: int
    crc_offset: int


class ParticleStoreReader:
    """Random-access reader for the particle store.

    Reading one region's records touches exactly one contiguous byte range
    of the file (the header and index are read once at open).  Per-block
    checksums are verified by `read_timestep`/`verify`, not by the random-
    access path, which by design reads only the selected byte ranges.
    """

    def __init__(self, source):
        if isinstance(source, (str, Path)):
            self._f = open(source, "rb")
            self._owns = True
        else:
            self._f = source
            self._owns = False
        try:
            self._parse()
        except Exception:
            self.close()
            raise

    def _parse(self):
        f = self._f
        f.seek(0)
        if _read_exact(f, 4) != PARTICLE_MAGIC:
            raise BadMagic("not a particle store")
        version = struct.unpack("<I", _read_exact(f, 4))[0]
        if version != FORMAT_VERSION:
            raise UnsupportedVersion(f"particle store version {version}")
        self.region_counts = struct.unpack("<3I", _read_exact(f, 12))
        n_vars = struct.unpack("<H", _read_exact(f, 2))[0]
        self.variables = []
        for _ in range(n_vars):
            name_len = struct.unpack("<H", _read_exact(f, 2))[0]
            name = _read_exact(f, name_len).decode("utf-8")
            unit_len = struct.unpack("<H", _read_exact(f, 2))[0]
            unit = _read_exact(f, unit_len).decode("utf-8")
            self.variables.append((name, unit))
        n_steps = struct.unpack("<I", _read_exact(f, 4))[0]
        self.record_size = record_size(len(self.variables))
        self._dtype = record_dtype(len(self.variables))
        self._steps: list[_StepLayout] = []
        r_total = self.region_count
        for _ in range(n_steps):
            block_start = f.tell()
            time = struct.unpack("<d", _read_exact(f, 8))[0]
            n_records = struct.unpack("<Q", _read_exact(f, 8))[0]
            pairs = np.frombuffer(_read_exact(f, 16 * r_total), dtype="<u8")
            table = ParticleIndexTable(
                pairs[0::2].astype(np.int64), pairs[1::2].astype(np.int64)
            )
            table.validate(n_records)
            records_base = f.tell()
            f.seek(n_records * self.record_size, io.SEEK_CUR)
            crc_offset = f.tell()
            _read_exact(f, 4)
            self._steps.append(
                _StepLayout(time, n_records, table, block_start, records_base, crc_offset)
            )

    @property
    def region_count(self) -> int:
        rx, ry, rz = self.region_counts
        return rx * ry * rz

    @property
    def timestep_count(self) -> int:
        return len(self._steps)

    @property
    def times(self) -> list[float]:
        return [s.time for s in self._steps]

    def index_table(self, timestep: int) -> ParticleIndexTable:
        return self._step(timestep).table

    def _step(self, timestep: int) -> _StepLayout:
        if not 0 <= timestep < len(self._steps):
            raise UnknownTimestep(f"timestep {timestep} outside [0, {len(self._steps)})")
        return self._steps[timestep]

    def read_region(self, timestep: int, region: int) -> list[ParticleRecord]:
        step = self._step(timestep)
        if not 0 <= region < self.region_count:
            raise UnknownRegion(f"region {region} outside [0, {self.region_count})")
        count = int(step.table.counts[region])
        if count == 0:
            return []
        offset = int(step.table.offsets[region])
        self._f.seek(step.records_base + offset * self.record_size)
        raw = _read_exact(self._f, count * self.record_size)
        return _array_to_records(np.frombuffer(raw, dtype=self._dtype))

    def read_timestep(self, timestep: int) -> ParticleTimestep:
        """Read one full timestep, verifying its checksum."""
        step = self._step(timestep)
        self._f.seek(step.block_start)
        block = _read_exact(self._f, step.crc_offset - step.block_start)
        stored = struct.unpack("<I", _read_exact(self._f, 4))[0]
        if crc32c(block) != stored:
            raise ChecksumMismatch(f"timestep {timestep}")
        records = _array_to_records(
            np.frombuffer(block[16 + 16 * self.region_count :], dtype=self._dtype)
        )
        return ParticleTimestep(time=step.time, table=step.table, records=records)

    def verify(self):
        for t in range(len(self._steps)):
            self.read_timestep(t)

    def close(self):
        if self._owns:
            self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# ---------------------------------------------------------------------------
# Raw field input (RFLD).

@dataclass
class RawFieldData:
    axes: RectilinearAxes
    variables: list[tuple[str, str]]
    times: list[float]
    fields: list[dict[int, np.ndarray]]

    def variable_id(self, name: str) -> int:
        for i, (n, _) in enumerate(self.variables):
            if n == name:
                return i
        raise KeyError(name)


def write_raw_field(path, axes: RectilinearAxes, variables, steps):
    """steps: iterable of (time, {var id -> flat x-fastest f64 array})."""
    ncells = axes.dims[0] * axes.dims[1] * axes.dims[2]
    w = ByteWriter()
    w.raw(RAW_MAGIC)
    w.u32(FORMAT_VERSION)
    for d in axes.dims:
        w.u32(d)
    for c in axes.coords:
        w.raw(c.astype("<f8").tobytes())
    _write_variable_table(w, variables)
    steps = list(steps)
    w.u32(len(steps))
    for time, field_map in steps:
        w.f64(time)
        for var in range(len(variables)):
            arr = np.asarray(field_map[var], dtype=np.float64).reshape(-1)
            if arr.size != ncells:
                raise ValueError(f"variable {var}: {arr.size} values for {ncells} cells")
            w.raw(arr.astype("<f8").tobytes())
    Path(path).write_bytes(bytes(w.buf))


class RawFieldReader:
    """Lazy per-timestep reader for the raw field format."""

    def __init__(self, path):
        self._f = open(path, "rb")
        try:
            if _read_exact(self._f, 4) != RAW_MAGIC:
                raise BadMagic("not a raw field file")
            version = struct.unpack("<I", _read_exact(self._f, 4))[0]
            if version != FORMAT_VERSION:
                raise UnsupportedVersion(f"raw field version {version}")
            dims = struct.unpack("<3I", _read_exact(self._f, 12))
            coords = [
                np.frombuffer(_read_exact(self._f, 8 * d), dtype="<f8").copy() for d in dims
            ]
            self.axes = RectilinearAxes(*coords)
            n_vars = struct.unpack("<H", _read_exact(self._f, 2))[0]
            self.variables = []
            for _ in range(n_vars):
                nlen = struct.unpack("<H", _read_exact(self._f, 2))[0]
                name = _read_exact(self._f, nlen).decode("utf-8")
                ulen = struct.unpack("<H", _read_exact(self._f, 2))[0]
                unit = _read_exact(self._f, ulen).decode("utf-8")
                self.variables.append((name, unit))
            self.timestep_count = struct.unpack("<I", _read_exact(self._f, 4))[0]
            self._ncells = dims[0] * dims[1] * dims[2]
            self._base = self._f.tell()
            self._step_size = 8 + len(self.variables) * self._ncells * 8
            self.times = []
            for t in range(self.timestep_count):
                self._f.seek(self._base + t * self._step_size)
                self.times.append(struct.unpack("<d", _read_exact(self._f, 8))[0])
        except Exception:
            self._f.close()
            raise

    def variable_id(self, name: str) -> int:
        for i, (n, _) in enumerate(self.variables):
            if n == name:
                return i
        raise KeyError(name)

    def read_timestep(self, t: int) -> tuple[float, dict[int, np.ndarray]]:
        if not 0 <= t < self.timestep_count:
            raise UnknownTimestep(f"timestep {t} outside [0, {self.timestep_count})")
        self._f.seek(self._base + t * self._step_size)
        time = struct.unpack("<d", _read_exact(self._f, 8))[0]
        fields = {}
        for var in range(len(self.variables)):
            raw = _read_exact(self._f, 8 * self._ncells)
            fields[var] = np.frombuffer(raw, dtype="<f8").copy()
        return time, fields

    def close(self):
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_raw_field(path) -> RawFieldData:
    with RawFieldReader(path) as rdr:
        steps = [rdr.read_timestep(t) for t in range(rdr.timestep_count)]
        return RawFieldData(
            axes=rdr.axes,
            variables=rdr.variables,
            times=[s[0] for s in steps],
            fields=[s[1] for s in steps],
        )
