"""Reading and writing cohort / nomination files.

Two equivalent encodings are accepted for each file: comma-separated text
with a header row, and a JSON array of row objects with the same keys.
Row numbers in errors and warnings are 1-based data rows (the header is
not counted).
"""

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError, IngestError
from .graph import (ATTRIBUTE_LEVELS, CONTEXTS, PARTICIPANT_FIELDS, Cohort, Nomination,
                    Participant, bmi_category_from_value)

REQUIRED_COHORT_COLUMNS = ("id", "sex", "carriage_direct", "carriage_enrichment")
COHORT_COLUMNS = PARTICIPANT_FIELDS
NOMINATION_COLUMNS = ("from", "to") + CONTEXTS
MISSING_TOKENS = {"", "na"}
FLAG_TOKENS = {"yes": True, "1": True, "true": True, "no": False, "0": False, "false": False}
NOMINATION_CAP = 5

_WEEK_RE = re.compile(r"^(\d{4})-?W?(\d{1,2})$", re.IGNORECASE)


@dataclass
class IngestReport:
    n_participants: int = 0
    n_nominations_raw: int = 0
    n_nominations_kept: int = 0
    n_nominations_dropped_external: int = 0
    n_nominations_dropped_self: int = 0
    n_duplicate_nominations: int = 0
    n_flagless_nominations: int = 0
    warnings: list = field(default_factory=list)

    def warn(self, row, message):
        self.warnings.append((row, message))

    def merge(self, other):
        out = IngestReport()
        for name in self.__dataclass_fields__:
            if name == "warnings":
                out.warnings = self.warnings + other.warnings
            else:
                setattr(out, name, getattr(self, name) + getattr(other, name))
        return out

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["warnings"] = [{"row": r, "message": m} for r, m in self.warnings]
        return d


def _read_rows(source):
    """Return (header, rows) from a path, file object or literal text."""
    looks_like_path = isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and not source.lstrip().startswith("["))
    if looks_like_path:
        path = Path(source)
        if not path.is_file():
            raise IngestError(f"no such file: {path}")
        text = path.read_text(encoding="utf-8-sig")
        is_json = path.suffix.lower() == ".json"
    elif hasattr(source, "read"):
        text = source.read()
        is_json = None
    else:
        text = str(source)
        is_json = None
    if not text.strip():
        return [], []
    if is_json is None:
        is_json = text.lstrip().startswith("[")
    if is_json:
        try:
            records = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc}") from None
        if not isinstance(records, list) or not all(isinstance(r, dict) for r in records):
            raise IngestError("JSON input must be an array of objects")
        header = []
        for r in records:
            for k in r:
                if k not in header:
                    header.append(k)
        rows = [{k: _json_token(r.get(k)) for k in header} for r in records]
        return header, rows
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise IngestError("missing header row")
    header = [h.strip() for h in reader.fieldnames]
    rows = []
    for raw in reader:
        if None in raw:
            raise IngestError("more fields than header columns", row=reader.line_num - 1)
        rows.append({h.strip(): (v if v is not None else "") for h, v in raw.items()})
    return header, rows


def _json_token(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _norm(token):
    return token.strip().lower().replace(" ", "_").replace("-", "_")


def _is_missing(token):
    return token is None or token.strip().lower() in MISSING_TOKENS


def _parse_week(token):
    m = _WEEK_RE.match(token.strip())
    if not m:
        return None
    year, week = int(m.group(1)), int(m.group(2))
    if not 1 <= week <= 53:
        return None
    return f"{year:04d}-W{week:02d}"


def parse_cohort(source):
    """Parse a cohort file into a :class:`Cohort` and an :class:`IngestReport`.

    Required columns are ``id, sex, carriage_direct, carriage_enrichment``.
    A raw ``bmi`` column is converted to ``bmi_category`` when the latter is
    absent or missing on a row.
    """
    header, rows = _read_rows(source)
    missing = [c for c in REQUIRED_COHORT_COLUMNS if c not in header]
    if missing:
        raise IngestError(f"missing required column(s): {', '.join(missing)}")
    report = IngestReport()
    known = set(COHORT_COLUMNS) | {"bmi"}
    for col in header:
        if col not in known:
            report.warn(None, f"ignoring unknown column {col!r}")

    participants = []
    seen = {}
    for rownum, row in enumerate(rows, start=1):
        values = {}
        pid = row.get("id", "").strip()
        if _is_missing(pid):
            raise IngestError("empty id", row=rownum)
        if pid in seen:
            raise IngestError(f"duplicate id {pid!r} (first seen on row {seen[pid]})",
                              row=rownum)
        seen[pid] = rownum
        values["id"] = pid
        for col in COHORT_COLUMNS:
            if col == "id" or col not in row:
                continue
            token = row[col]
            required = col in REQUIRED_COHORT_COLUMNS
            if _is_missing(token):
                if required:
                    raise IngestError(f"missing value in required column {col!r}", row=rownum)
                continue
            value = _convert(col, token)
            if value is None:
                if required:
                    raise IngestError(f"unknown token {token!r} in required column {col!r}",
                                      row=rownum)
                report.warn(rownum, f"unknown token {token!r} in column {col!r}; set missing")
                continue
            values[col] = value
        if values.get("bmi_category") is None and not _is_missing(row.get("bmi")):
            try:
                values["bmi_category"] = bmi_category_from_value(float(row["bmi"]))
            except ValueError:
                report.warn(rownum, f"unparseable bmi {row['bmi']!r}; set missing")
        try:
            participants.append(Participant(**values))
        except ConfigurationError as exc:
            raise IngestError(str(exc), row=rownum) from None
    report.n_participants = len(participants)
    return Cohort(participants), report


def _convert(col, token):
    """Token -> typed value, or None if the token is not understood."""
    if col in ATTRIBUTE_LEVELS:
        value = _norm(token)
        return value if value in ATTRIBUTE_LEVELS[col] else None
    if col == "age":
        try:
            age = float(token)
        except ValueError:
            return None
        return age if math.isfinite(age) and age > 0 else None
    if col == "representativeness":
        try:
            score = float(token)
        except ValueError:
            return None
        if not score.is_integer():
            return None
        # out-of-range scores are an invariant violation, left to Participant
        return int(score)
    if col == "attendance_week":
        return _parse_week(token)
    return token.strip()


def _parse_flag(token, col, rownum):
    try:
        return FLAG_TOKENS[token.strip().lower()]
    except KeyError:
        raise IngestError(f"malformed flag {token!r} in column {col!r}", row=rownum) from None


def parse_nominations(source, cohort, cap=NOMINATION_CAP):
    """Parse a nomination file against ``cohort``.

    Targets outside the cohort are dropped and counted, self-nominations are
    dropped with a warning, repeated (from, to) pairs are merged by OR-ing
    their context flags, and a nominator naming more than ``cap`` distinct
    students is a hard error.
    """
    header, rows = _read_rows(source)
    missing = [c for c in NOMINATION_COLUMNS if c not in header]
    if not header and not rows:
        # a blank file simply means nobody nominated anyone
        return [], IngestReport(n_participants=len(cohort))
    if missing:
        raise IngestError(f"missing required column(s): {', '.join(missing)}")
    report = IngestReport(n_nominations_raw=len(rows))
    merged = {}
    targets = {}
    for rownum, row in enumerate(rows, start=1):
        src, dst = row["from"].strip(), row["to"].strip()
        if _is_missing(src) or _is_missing(dst):
            raise IngestError("empty from/to id", row=rownum)
        flags = {c for c in CONTEXTS if _parse_flag(row[c], c, rownum)}
        if src not in cohort:
            raise IngestError(f"nominator {src!r} is not in the cohort", row=rownum)
        if src == dst:
            report.n_nominations_dropped_self += 1
            report.warn(rownum, f"self-nomination by {src!r} dropped")
            continue
        named = targets.setdefault(src, set())
        named.add(dst)
        if len(named) > cap:
            raise IngestError(f"{src!r} names more than {cap} distinct students", row=rownum)
        if dst not in cohort:
            report.n_nominations_dropped_external += 1
            continue
        key = (src, dst)
        if key in merged:
            merged[key][0].update(flags)
            report.n_duplicate_nominations += 1
            continue
        merged[key] = (flags, rownum)
    nominations = []
    for (src, dst), (flags, rownum) in merged.items():
        if not flags:
            report.n_flagless_nominations += 1
            report.warn(rownum, f"nomination {src}->{dst} has no context flag; "
                                "counted in the overall layer only")
        nominations.append(Nomination(src, dst, frozenset(flags)))
    report.n_nominations_kept = len(nominations)
    return nominations, report


def load(cohort_source, nominations_source=None, cap=NOMINATION_CAP):
    """Parse both files; returns ``(cohort, nominations, report)``."""
    cohort, report = parse_cohort(cohort_source)
    nominations = []
    if nominations_source is not None:
        nominations, nom_report = parse_nominations(nominations_source, cohort, cap=cap)
        report = report.merge(nom_report)
        report.n_participants = len(cohort)
    return cohort, nominations, report


def _cell(value):
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cohort_to_csv(cohort):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COHORT_COLUMNS)
    for p in cohort:
        writer.writerow([_cell(getattr(p, c)) for c in COHORT_COLUMNS])
    return buf.getvalue()


def nominations_to_csv(nominations):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(NOMINATION_COLUMNS)
    for nom in nominations:
        writer.writerow([nom.source, nom.target]
                        + ["yes" if c in nom.contexts else "no" for c in CONTEXTS])
    return buf.getvalue()


def cohort_to_json(cohort):
    return json.dumps([{c: getattr(p, c) for c in COHORT_COLUMNS} for p in cohort], indent=1)


def nominations_to_json(nominations):
    rows = []
    for nom in nominations:
        row = {"from": nom.source, "to": nom.target}
        row.update({c: c in nom.contexts for c in CONTEXTS})
        rows.append(row)
    return json.dumps(rows, indent=1)


def write_cohort(cohort, path):
    path = Path(path)
    text = cohort_to_json(cohort) if path.suffix.lower() == ".json" else cohort_to_csv(cohort)
    path.write_text(text, encoding="utf-8")


def write_nominations(nominations, path):
    path = Path(path)
    if path.suffix.lower() == ".json":
        text = nominations_to_json(nominations)
    else:
        text = nominations_to_csv(nominations)
    path.write_text(text, encoding="utf-8")
