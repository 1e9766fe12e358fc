"""Batch harness: market snapshots, the four-curve set and methodology comparisons.

A snapshot is a versioned JSON document carrying the bootstrap quotes of each
named curve, a forward-start swap rate grid and cap/floor quotes.  From it the
harness builds the curves, prices the instruments under each methodology and
tabulates model-minus-market differences in basis points.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Sequence

from .bootstrap import (BootstrapResult, BootstrapSpec, Quote, bootstrap_forwarding_result,
                        bootstrap_ois_result, bootstrap_single_result, load_quotes)
from .curve import Curve, fra_rate
from .errors import ConfigurationError, CoverageError, MulticurveError
from .pricing import Methodology, MethodologyContext, make_swap, par_rate
from .sabr import SmileSection, SurfaceCalibration, calibrate_surface
from .temporal import DayCount, add_tenor, parse_date, tenor_months, year_fraction
from .volstrip import ForwardVolSurface, TermVolQuote, reimply_surface, term_to_premium

SCHEMA_VERSION = 1

EURIBOR_STANDARD = "Euribor Standard"
EURIBOR_6M_STANDARD = "Euribor 6M Standard"
EONIA_OIS = "Eonia OIS"
EURIBOR_6M_CSA = "Euribor 6M CSA"
CURVE_NAMES = (EURIBOR_STANDARD, EURIBOR_6M_STANDARD, EONIA_OIS, EURIBOR_6M_CSA)

# curve -> curve it is discounted on while bootstrapping
DEPENDENCIES = {
    EURIBOR_STANDARD: None,
    EURIBOR_6M_STANDARD: EURIBOR_STANDARD,
    EONIA_OIS: None,
    EURIBOR_6M_CSA: EONIA_OIS,
}

METHODOLOGIES = tuple(m.value for m in Methodology)
METHOD_CURVES = {
    Methodology.SINGLE: (EURIBOR_STANDARD, EURIBOR_STANDARD),
    Methodology.MULTI_NOCSA: (EURIBOR_STANDARD, EURIBOR_6M_STANDARD),
    Methodology.MULTI_CSA: (EONIA_OIS, EURIBOR_6M_CSA),
}
# which volatility surface each methodology must price caps with
DEFAULT_PAIRING = {
    Methodology.SINGLE.value: "euribor",
    Methodology.MULTI_NOCSA.value: "euribor",
    Methodology.MULTI_CSA.value: "eonia",
}
VOL_CONTEXTS = ("euribor", "eonia")


# --------------------------------------------------------------------------
# snapshot
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FsirsQuote:
    """Market rate of a forward-start swap starting ``start`` after spot and running ``tenor``."""

    start: str
    tenor: str
    rate: float

    @property
    def label(self) -> str:
        return f"{self.start}x{self.tenor}"

    def to_dict(self) -> dict:
        return {"start": self.start, "tenor": self.tenor, "rate": self.rate}


@dataclass
class MarketSnapshot:
    valuation_date: date
    curve_quotes: dict[str, list[Quote]]
    fsirs: list[FsirsQuote] = field(default_factory=list)
    cap_premia: list[TermVolQuote] = field(default_factory=list)
    cap_vols: dict[str, list[TermVolQuote]] = field(default_factory=dict)
    spot_date: date | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def spot(self) -> date:
        return self.spot_date or self.valuation_date

    def to_dict(self) -> dict:
        return {
            "schemaVersion": self.schema_version,
            "valuationDate": self.valuation_date.isoformat(),
            "spotDate": self.spot.isoformat(),
            "curves": {name: [q.to_dict() for q in quotes]
                       for name, quotes in self.curve_quotes.items()},
            "fsirs": [q.to_dict() for q in self.fsirs],
            "capFloor": {
                "premia": [q.to_dict() for q in self.cap_premia],
                "vols": {ctx: [q.to_dict() for q in quotes] for ctx, quotes in self.cap_vols.items()},
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_dict(cls, data: dict) -> "MarketSnapshot":
        version = data.get("schemaVersion")
        if version != SCHEMA_VERSION:
            raise ConfigurationError(f"unsupported snapshot schemaVersion {version!r}")
        try:
            valuation = parse_date(data["valuationDate"])
            curves = {name: load_quotes(qs) for name, qs in data.get("curves", {}).items()}
        except KeyError as exc:
            raise ConfigurationError(f"snapshot missing field {exc}") from exc
        unknown = set(curves) - set(CURVE_NAMES)
        if unknown:
            raise ConfigurationError(f"unknown curve names in snapshot: {sorted(unknown)}")
        cap = data.get("capFloor", {})
        spot = parse_date(data["spotDate"]) if data.get("spotDate") else None
        if spot is not None and spot < valuation:
            raise ConfigurationError("spot date precedes the valuation date")
        return cls(
            valuation_date=valuation,
            curve_quotes=curves,
            fsirs=[FsirsQuote(q["start"], q["tenor"], float(q["rate"])) for q in data.get("fsirs", [])],
            cap_premia=[_term_quote(q) for q in cap.get("premia", [])],
            cap_vols={ctx: [_term_quote(q) for q in qs] for ctx, qs in cap.get("vols", {}).items()},
            spot_date=spot,
        )

    @classmethod
    def load(cls, path) -> "MarketSnapshot":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read snapshot {path}: {exc}") from exc
        return cls.from_dict(data)


def _term_quote(d: dict) -> TermVolQuote:
    return TermVolQuote(d["maturity"], float(d["strike"]), float(d["value"]),
                        d.get("side", "auto"), d.get("quoteType", "vol"))


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------

@dataclass
class CurveSet:
    results: dict[str, BootstrapResult]

    def __getitem__(self, name: str) -> Curve:
        try:
            return self.results[name].curve
        except KeyError:
            raise ConfigurationError(f"curve {name!r} was not built") from None

    def __contains__(self, name: str) -> bool:
        return name in self.results

    @property
    def names(self) -> list[str]:
        return list(self.results)

    def context(self, methodology: Methodology | str) -> MethodologyContext:
        method = Methodology(methodology)
        disc, fwd = METHOD_CURVES[method]
        if method is Methodology.SINGLE:
            return MethodologyContext.single(self[disc])
        return MethodologyContext(self[disc], self[fwd], method)

    def diagnostics(self) -> list[dict]:
        rows = []
        for name, result in self.results.items():
            for d in result.diagnostics:
                rows.append({"curve": name, **d.to_dict()})
        return rows


def required_curves(names: Iterable[str]) -> list[str]:
    """``names`` plus the curves they are discounted on, in build order."""
    wanted = set()
    for name in names:
        if name not in DEPENDENCIES:
            raise ConfigurationError(f"unknown curve {name!r}; expected one of {CURVE_NAMES}")
        while name is not None:
            wanted.add(name)
            name = DEPENDENCIES[name]
    return [n for n in CURVE_NAMES if n in wanted]


def curves_for(methodologies: Iterable[str]) -> list[str]:
    names = set()
    for m in methodologies:
        names.update(METHOD_CURVES[Methodology(m)])
    return required_curves(names)


def run_curve_build(snapshot: MarketSnapshot, curve_names: Sequence[str] | None = None) -> CurveSet:
    """Bootstrap the requested curves (and their discounting dependencies)."""
    names = required_curves(curve_names or CURVE_NAMES)
    results: dict[str, BootstrapResult] = {}
    for name in names:
        quotes = snapshot.curve_quotes.get(name)
        if not quotes:
            raise ConfigurationError(f"snapshot has no quotes for curve {name!r}")
        dep = DEPENDENCIES[name]
        try:
            if name == EONIA_OIS:
                spec = BootstrapSpec(snapshot.valuation_date, quotes, "discounting", "ON",
                                     spot=snapshot.spot, name=name)
                results[name] = bootstrap_ois_result(spec)
            elif dep is None:
                spec = BootstrapSpec(snapshot.valuation_date, quotes, "discounting", None,
                                     spot=snapshot.spot, name=name)
                results[name] = bootstrap_single_result(spec)
            else:
                spec = BootstrapSpec(snapshot.valuation_date, quotes, "forwarding", "6M",
                                     discount_curve=results[dep].curve, spot=snapshot.spot, name=name)
                results[name] = bootstrap_forwarding_result(spec)
        except MulticurveError as exc:
            exc.args = (f"{name}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
    return CurveSet(results)


# --------------------------------------------------------------------------
# comparison reports
# --------------------------------------------------------------------------

def population_std(values: Sequence[float]) -> float:
    n = len(values)
    if n == 0:
        return float("nan")
    mean = math.fsum(values) / n
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)


@dataclass
class ComparisonRow:
    instrument: str
    methodology: str
    x: float
    y: float
    market: float
    model: float | None
    diff_bp: float | None
    excluded: bool = False
    flag: str = ""

    def to_dict(self) -> dict:
        return {"instrument": self.instrument, "methodology": self.methodology, "x": self.x,
                "y": self.y, "market": self.market, "model": self.model, "diffBp": self.diff_bp,
                "excluded": self.excluded, "flag": self.flag}


ROW_FIELDS = ("instrument", "methodology", "x", "y", "market", "model", "diffBp", "excluded", "flag")


@dataclass
class ComparisonReport:
    """Per-instrument model-minus-market differences with range and std-dev per methodology."""

    name: str
    rows: list[ComparisonRow]
    x_label: str
    y_label: str
    metadata: dict = field(default_factory=dict)

    @property
    def methodologies(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.methodology not in seen:
                seen.append(r.methodology)
        return seen

    def differences(self, methodology: str, excluding: bool = False) -> list[float]:
        return [r.diff_bp for r in self.rows
                if r.methodology == methodology and r.diff_bp is not None
                and not (excluding and r.excluded)]

    def statistics(self, methodology: str, excluding: bool = False) -> dict:
        d = self.differences(methodology, excluding)
        if not d:
            return {"count": 0, "min": None, "max": None, "std": None}
        return {"count": len(d), "min": min(d), "max": max(d), "std": population_std(d)}

    def summary(self) -> list[dict]:
        out = []
        for m in self.methodologies:
            out.append({"methodology": m, "subset": "all", **self.statistics(m)})
            if any(r.excluded for r in self.rows):
                out.append({"methodology": m, "subset": "excluding", **self.statistics(m, True)})
        return out

    def plot_rows(self) -> list[tuple[float, float, str]]:
        """Long-format (x, y, series) points; one series per methodology and y value."""
        return [(r.x, r.diff_bp, f"{r.methodology} {self.y_label}={_fmt_num(r.y)}")
                for r in self.rows if r.diff_bp is not None]

    def to_dict(self) -> dict:
        return {"report": self.name, "metadata": {"stdDefinition": "population", **self.metadata},
                "summary": self.summary(), "rows": [r.to_dict() for r in self.rows]}


def _fmt_num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def _years(tenor: str) -> float:
    return tenor_months(tenor) / 12.0


def _diff_bp(model: float, market: float) -> float:
    return (model - market) * 1e4


def run_fsirs_comparison(snapshot: MarketSnapshot, curves: CurveSet,
                         methodologies: Sequence[str] = METHODOLOGIES,
                         exclude_max_years: float = 2.0) -> ComparisonReport:
    """Par rate minus market rate (bp) for every grid cell and methodology.

    Cells with start or tenor up to ``exclude_max_years`` are marked excluded so
    the summary can be reported with and without the short stripes.
    """
    rows = []
    for m in methodologies:
        ctx = curves.context(m)
        for q in snapshot.fsirs:
            start = add_tenor(snapshot.spot, q.start)
            end = add_tenor(start, q.tenor)
            excluded = _years(q.start) <= exclude_max_years or _years(q.tenor) <= exclude_max_years
            try:
                model = par_rate(ctx, make_swap(start, end))
                diff, flag = _diff_bp(model, q.rate), ""
            except CoverageError as exc:
                model, diff, flag = None, None, f"coverage: {exc}"
            rows.append(ComparisonRow(q.label, Methodology(m).value, _years(q.tenor),
                                      _years(q.start), q.rate, model, diff, excluded, flag))
    return ComparisonReport("fsirs", rows, "tenor", "start",
                            {"units": "bp", "excludedIf": f"start or tenor <= {exclude_max_years:g}Y"})


def vol_pairing(pairing: dict | None = None, allow_mispairing: bool = False) -> dict[str, str]:
    """Methodology -> volatility context, enforcing the Euribor/Eonia pairing rule."""
    out = dict(DEFAULT_PAIRING)
    for m, ctx in (pairing or {}).items():
        m = Methodology(m).value
        if ctx not in VOL_CONTEXTS:
            raise ConfigurationError(f"unknown volatility context {ctx!r}")
        if ctx != DEFAULT_PAIRING[m] and not allow_mispairing:
            raise ConfigurationError(
                f"{m} must be priced with {DEFAULT_PAIRING[m]} volatilities, not {ctx}; "
                "enable the mispairing diagnostic to override")
        out[m] = ctx
    return out


def run_capfloor_comparison(snapshot: MarketSnapshot, curves: CurveSet,
                            methodologies: Sequence[str] = METHODOLOGIES,
                            pairing: dict | None = None,
                            allow_mispairing: bool = False) -> ComparisonReport:
    """Model minus market cap/floor premium (bp of notional) per methodology.

    Each methodology prices with the term vols of its paired context; the
    instrument side (cap or floor) is taken from the market premium quote.
    """
    paired = vol_pairing(pairing, allow_mispairing)
    spot = snapshot.spot
    rows = []
    for m in methodologies:
        m = Methodology(m).value
        vol_ctx = paired[m]
        if vol_ctx not in snapshot.cap_vols:
            raise ConfigurationError(f"snapshot has no {vol_ctx} cap/floor volatilities for {m}")
        vols = {(q.maturity, q.strike): q for q in snapshot.cap_vols[vol_ctx]}
        ctx = curves.context(m)
        flag = "mispaired" if vol_ctx != DEFAULT_PAIRING[m] else ""
        for premium in snapshot.cap_premia:
            key = (premium.maturity, premium.strike)
            if key not in vols:
                raise ConfigurationError(f"no {vol_ctx} vol for cap {premium.maturity} K={premium.strike}")
            side = premium.side if premium.side != "auto" else None
            vq = vols[key].with_value(vols[key].value, "vol", side)
            label = f"{premium.maturity} K={premium.strike!r} {vq.side}"
            try:
                model = term_to_premium(ctx, vq, spot)
                diff, note = _diff_bp(model, premium.value), flag
            except CoverageError as exc:
                model, diff, note = None, None, f"coverage: {exc}"
            rows.append(ComparisonRow(label, m, premium.strike, _years(premium.maturity),
                                      premium.value, model, diff, False, note))
    return ComparisonReport("capfloor", rows, "strike", "maturity",
                            {"units": "bp of notional", "pairing": paired})


# --------------------------------------------------------------------------
# volatility stripping and SABR calibration
# --------------------------------------------------------------------------

STRIP_CONTEXTS = {"euribor": Methodology.MULTI_NOCSA, "eonia": Methodology.MULTI_CSA}


def run_strip(snapshot: MarketSnapshot, curves: CurveSet) -> dict[str, ForwardVolSurface]:
    """Strip the market premia under the Euribor and the Eonia curve pairs."""
    if not snapshot.cap_premia:
        raise ConfigurationError("snapshot has no cap/floor premia to strip")
    ctx_a = curves.context(STRIP_CONTEXTS["euribor"])
    ctx_b = curves.context(STRIP_CONTEXTS["eonia"])
    a, b = reimply_surface(snapshot.cap_premia, ctx_a, ctx_b, snapshot.spot)
    return {"euribor": ForwardVolSurface("euribor", a.caplets),
            "eonia": ForwardVolSurface("eonia", b.caplets)}


def smile_sections(snapshot: MarketSnapshot, ctx: MethodologyContext,
                   surface: ForwardVolSurface) -> list[SmileSection]:
    """One section per quoted cap maturity: the last caplet of that cap across strikes."""
    spot = snapshot.spot
    maturities = sorted({q.maturity for q in snapshot.cap_premia}, key=lambda t: add_tenor(spot, t))
    sections = []
    for label in maturities:
        q = next(q for q in snapshot.cap_premia if q.maturity == label)
        start, end = q.schedule(spot).periods[-1]
        strikes, vols = [], []
        for k in surface.strikes:
            try:
                vols.append(surface.vol(start, k))
                strikes.append(k)
            except KeyError:
                continue
        fwd = fra_rate(ctx.forward, start, end, DayCount.ACT_360)
        sections.append(SmileSection(
            expiry=year_fraction(DayCount.ACT_365F, ctx.valuation_date, start),
            forward=fwd, strikes=tuple(strikes), vols=tuple(vols),
            maturity=add_tenor(spot, label), fixing=start,
            discount=ctx.discount.discount_factor(end),
            accrual=year_fraction(DayCount.ACT_360, start, end), tag=label))
    return sections


def run_calibration(snapshot: MarketSnapshot, curves: CurveSet, context: str = "eonia",
                    objective: str = "standard", beta: float = 0.5,
                    surfaces: dict[str, ForwardVolSurface] | None = None) -> SurfaceCalibration:
    if context not in STRIP_CONTEXTS:
        raise ConfigurationError(f"unknown volatility context {context!r}")
    surfaces = surfaces or run_strip(snapshot, curves)
    ctx = curves.context(STRIP_CONTEXTS[context])
    return calibrate_surface(smile_sections(snapshot, ctx, surfaces[context]), objective, beta)


CALIBRATION_FIELDS = ("maturity", "alpha", "beta", "rho", "nu", "objective", "maxAbsResidual")


def calibration_rows(calibration: SurfaceCalibration) -> list[dict]:
    rows = []
    for rep in calibration.reports:
        p = rep.params
        rows.append({"maturity": rep.section.maturity.isoformat(), "alpha": p.alpha, "beta": p.beta,
                     "rho": p.rho, "nu": p.nu, "objective": rep.objective,
                     "maxAbsResidual": rep.max_abs_residual})
    return rows


# --------------------------------------------------------------------------
# emission
# --------------------------------------------------------------------------

def csv_text(fieldnames: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_fmt_num(row.get(f)) for f in fieldnames])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def json_text(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2) + "\n"


def _write(path: str, text: str) -> str:
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def emit_report(report: ComparisonReport, out_dir, fmt: str = "csv") -> list[str]:
    """Write rows (CSV or JSON), the summary (JSON) and long-format plot data (CSV)."""
    if fmt not in ("csv", "json"):
        raise ConfigurationError(f"unknown report format {fmt!r}")
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, report.name)
    paths = []
    if fmt == "csv":
        paths.append(_write(base + ".csv", csv_text(ROW_FIELDS, (r.to_dict() for r in report.rows))))
    else:
        paths.append(_write(base + ".json", json_text(report.to_dict())))
    summary = {"report": report.name, "metadata": {"stdDefinition": "population", **report.metadata},
               "summary": report.summary()}
    paths.append(_write(base + "_summary.json", json_text(summary)))
    plot = ({"x": x, "y": y, "series": s} for x, y, s in report.plot_rows())
    paths.append(_write(base + "_plot.csv", csv_text(("x", "y", "series"), plot)))
    return paths
