"""Golden fixtures: frozen CLI outputs with manifest sidecars.

Layout: <dir>/<name>.csv holds the frozen output; <dir>/<name>.manifest.json
holds {"argv": [...], "policy": "exact"|"band", "digest": sha256-hex} and,
for "band" fixtures, the recorded binomial band for the miss rate.
Deterministic commands are compared byte-exactly; coverage fixtures only
need their miss rate to fall inside the recorded three-sigma band.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass

from .cli import run
from .errors import TruncMeanError

__all__ = ["FixtureResult", "record_fixture", "verify_fixtures", "default_dir"]


def default_dir() -> str:
    """fixtures/ directory at the repository root, next to src/."""
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.normpath(os.path.join(here, "..", "..", "fixtures"))


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _summary(text: str) -> dict | None:
    for line in text.splitlines():
        if line.startswith("# summary "):
            return json.loads(line[len("# summary "):])
    return None


def record_fixture(name: str, argv: list, policy: str, directory: str) -> None:
    if policy not in ("exact", "band"):
        raise TruncMeanError(f"unknown tolerance policy {policy!r}")
    code, text = run(list(argv))
    if code != 0:
        raise TruncMeanError(f"fixture command failed ({code}): {text}")
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, name + ".csv"), "w",
              encoding="ascii", newline="\n") as fh:
        fh.write(text)
    manifest = {"argv": list(argv), "policy": policy, "digest": _digest(text)}
    if policy == "band":
        s = _summary(text)
        if s is None:
            raise TruncMeanError("band fixture output has no summary line")
        r, rate = s["replicates"], s["miss_rate"]
        sigma = math.sqrt(max(rate * (1.0 - rate), 1.0 / r) / r)
        manifest["band"] = {"miss_rate": rate, "halfwidth": 3.0 * sigma}
    with open(os.path.join(directory, name + ".manifest.json"), "w",
              encoding="ascii", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class FixtureResult:
    name: str
    ok: bool
    detail: str


def verify_fixtures(directory: str | None = None) -> list:
    """Re-run every recorded manifest and compare per its tolerance policy.

    Missing or unreadable fixture files are explicit failures.  The check is
    idempotent and independent of listing order (results are sorted by
    name).
    """
    directory = directory or default_dir()
    results = []
    try:
        names = sorted(
            f[: -len(".manifest.json")]
            for f in os.listdir(directory)
            if f.endswith(".manifest.json")
        )
    except OSError as exc:
        return [FixtureResult("<dir>", False, f"cannot list {directory}: {exc}")]
    if not names:
        return [FixtureResult("<dir>", False, f"no fixtures in {directory}")]

    for name in names:
        try:
            with open(os.path.join(directory, name + ".manifest.json"),
                      encoding="ascii") as fh:
                manifest = json.load(fh)
            with open(os.path.join(directory, name + ".csv"),
                      encoding="ascii", newline="") as fh:
                frozen = fh.read()
        except OSError as exc:
            results.append(FixtureResult(name, False, f"unreadable: {exc}"))
            continue
        if _digest(frozen) != manifest["digest"]:
            results.append(FixtureResult(
                name, False, "stored file does not match its recorded digest"))
            continue
        code, text = run(list(manifest["argv"]))
        if code != 0:
            results.append(FixtureResult(name, False, f"replay exit {code}"))
            continue
        if manifest["policy"] == "exact":
            if text == frozen:
                results.append(FixtureResult(name, True, "byte-exact"))
            else:
                diff = next(
                    (f"line {i}: {a!r} != {b!r}"
                     for i, (a, b) in enumerate(
                         zip(text.splitlines(), frozen.splitlines()), 1)
                     if a != b),
                    "length mismatch",
                )
                results.append(FixtureResult(name, False, diff))
        else:
            s = _summary(text)
            band = manifest["band"]
            if s is None:
                results.append(FixtureResult(name, False, "no summary line"))
            elif abs(s["miss_rate"] - band["miss_rate"]) <= band["halfwidth"]:
                results.append(FixtureResult(
                    name, True,
                    f"miss rate {s['miss_rate']} within recorded band"))
            else:
                results.append(FixtureResult(
                    name, False,
                    f"miss rate {s['miss_rate']} outside band "
                    f"{band['miss_rate']} +- {band['halfwidth']}"))
    return results
