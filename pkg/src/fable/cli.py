"""Operator command line: the full claim lifecycle without the UI, plus
the server entry point.

Commands run either against the local data directory (embedded mode,
takes the store's writer lock for the command's duration) or a remote
server via --server. --json output shares the serialization path with
the HTTP API, so bytes match for the same state.

Exit codes: 0 success, 1 validation/user error, 2 I/O or server error.
"""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import views
from .assessment import (
    AssessmentError,
    assessment_from_dict,
    consensus,
    explain,
    load_assessment,
    score_assessment,
)
from .questionnaire import (
    DIMENSIONS,
    QuestionnaireError,
    load_questionnaire,
)
from .service import (
    ServiceConfig,
    consensus_scores,
    empty_vector,
    ensure_questionnaire,
    queue_inputs,
)
from .store import EventStore, LockError, StoreError
from .triage import default_profile, rank_queue

EXIT_OK = 0
EXIT_USER = 1
EXIT_IO = 2

TABLE_WIDTH = 120


def _dump(doc) -> str:
    # same serializer settings as the HTTP layer, so bytes match
    return json.dumps(doc, ensure_ascii=False, allow_nan=False,
                      indent=None, separators=(",", ":"))


def _data_dir(explicit: str | None) -> Path:
    return Path(explicit or os.environ.get("FABLE_DATA_DIR", "./fable-data"))


def _open_store(data_dir: str | None) -> EventStore:
    try:
        store = EventStore(_data_dir(data_dir))
    except LockError as e:
        raise click.ClickException(str(e))
    ensure_questionnaire(store, ServiceConfig())
    return store


def _remote(server: str, method: str, path: str, body=None):
    """One API call in remote mode; exits 2 on connection failure and 1 on
    an API error, printing the server's message."""
    import httpx

    try:
        resp = httpx.request(method, server.rstrip("/") + path, json=body,
                             timeout=30)
    except httpx.HTTPError as e:
        click.echo(f"error: cannot reach {server}: {e}", err=True)
        sys.exit(EXIT_IO)
    if resp.status_code >= 400:
        try:
            message = resp.json().get("message", resp.text)
        except ValueError:
            message = resp.text
        click.echo(f"error: {message}", err=True)
        sys.exit(EXIT_USER if resp.status_code < 500 else EXIT_IO)
    return resp


def _fmt_score(f: Fraction | None) -> str:
    return "-" if f is None else f"{float(f):.2f}"


@click.group()
def main():
    """Claim triage for fact-checkers: assess, score, and prioritize."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Config file (JSON); also FABLE_CONFIG.")
def serve(config_path):
    """Run the HTTP service until interrupted."""
    import uvicorn

    from .service import create_app

    try:
        config = ServiceConfig.load(config_path)
    except (OSError, json.JSONDecodeError) as e:
        click.echo(f"error: cannot read config: {e}", err=True)
        sys.exit(EXIT_IO)
    try:
        store = EventStore(config.data_dir)
    except (LockError, StoreError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_IO)
    try:
        ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        app = create_app(store, config, ui_dir=ui_dir if ui_dir.is_dir() else None)
        host, _, port = config.listen_addr.rpartition(":")
        click.echo(f"listening on http://{config.listen_addr}")
        try:
            uvicorn.run(app, host=host or "127.0.0.1", port=int(port),
                        log_level="warning")
        except (OSError, SystemExit) as e:
            click.echo(f"error: cannot bind {config.listen_addr}: {e}", err=True)
            sys.exit(EXIT_IO)
    finally:
        store.close()


@main.command("import")
@click.argument("file", type=click.Path(exists=False))
@click.option("--data-dir", default=None)
@click.option("--server", default=None, help="Remote API base URL.")
@click.option("--json", "as_json", is_flag=True)
def import_cmd(file, data_dir, server, as_json):
    """Import a claim batch (JSON lines or CSV)."""
    try:
        source = Path(file).read_bytes()
    except OSError as e:
        click.echo(f"error: cannot read {file}: {e}", err=True)
        sys.exit(EXIT_IO)
    if server:
        imported, errors = _remote_import(server, source)
    else:
        with _open_store(data_dir) as store:
            imported, errors = store.import_claims(source)
    if as_json:
        click.echo(_dump({
            "imported": [c if isinstance(c, dict) else views.claim_view(c)
                         for c in imported],
            "errors": errors,
        }))
    else:
        click.echo(f"imported {len(imported)} claim(s), {len(errors)} error(s)")
        for err in errors:
            click.echo(f"  line {err['line']}: {err['reason']}")
    sys.exit(EXIT_USER if errors and not imported else EXIT_OK)


def _remote_import(server: str, source: bytes):
    """Remote-mode batch import: one POST /claims per parsed row."""
    from .store import _looks_like_csv, _parse_csv, _parse_jsonl

    text = source.decode("utf-8")
    rows = _parse_csv(text) if _looks_like_csv(text) else _parse_jsonl(text)
    imported, errors = [], []
    for lineno, row, err in rows:
        if err is not None:
            errors.append({"line": lineno, "reason": err})
            continue
        import httpx

        try:
            resp = httpx.post(server.rstrip("/") + "/api/v1/claims", json=row,
                              timeout=30)
        except httpx.HTTPError as e:
            click.echo(f"error: cannot reach {server}: {e}", err=True)
            sys.exit(EXIT_IO)
        if resp.status_code == 201:
            imported.append(resp.json())
        else:
            try:
                reason = resp.json().get("message", resp.text)
            except ValueError:
                reason = resp.text
            errors.append({"line": lineno, "reason": reason})
    return imported, errors


@main.command()
@click.argument("claim_id")
@click.option("--answers", "answers_file", required=True, type=click.Path())
@click.option("--assessor", required=True)
@click.option("--data-dir", default=None)
@click.option("--server", default=None, help="Remote API base URL.")
@click.option("--json", "as_json", is_flag=True)
def assess(claim_id, answers_file, assessor, data_dir, server, as_json):
    """Record an assessment from an answers document."""
    try:
        raw = Path(answers_file).read_bytes()
    except OSError as e:
        click.echo(f"error: cannot read {answers_file}: {e}", err=True)
        sys.exit(EXIT_IO)
    if server:
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_USER)
        doc["assessor_id"] = assessor
        resp = _remote(server, "POST",
                       f"/api/v1/claims/{claim_id}/assessments", doc)
        if as_json:
            click.echo(resp.content.decode("utf-8"))
        else:
            body = resp.json()
            click.echo(f"recorded assessment of {claim_id} by "
                       f"{body['assessor_id']} ({len(body['answers'])} answers)")
        return
    with _open_store(data_dir) as store:
        q = store.state.active_questionnaire()
        try:
            doc = json.loads(raw)
            doc["claim_id"] = claim_id
            doc["assessor_id"] = assessor
            doc.setdefault("questionnaire_version", q.version)
            assessment = assessment_from_dict(doc)
            store.record_assessment(assessment)
        except (json.JSONDecodeError, AssessmentError, StoreError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_USER)
    if as_json:
        click.echo(_dump(views.assessment_view(assessment)))
    else:
        click.echo(f"recorded assessment of {claim_id} by {assessor} "
                   f"({len(assessment.answers)} answers)")


@main.command()
@click.argument("claim_id")
@click.option("--by", type=click.Choice(["consensus", "assessor"]),
              default="consensus")
@click.option("--assessor", default=None)
@click.option("--data-dir", default=None)
@click.option("--server", default=None, help="Remote API base URL.")
@click.option("--json", "as_json", is_flag=True)
def score(claim_id, by, assessor, data_dir, server, as_json):
    """Per-dimension scores with the why-explanation block."""
    if server:
        if by == "assessor" and not assessor:
            click.echo("error: --by assessor requires --assessor", err=True)
            sys.exit(EXIT_USER)
        from urllib.parse import urlencode

        params = {"by": by}
        if assessor:
            params["assessor"] = assessor
        resp = _remote(server, "GET",
                       f"/api/v1/claims/{claim_id}/score?{urlencode(params)}")
        if as_json:
            click.echo(resp.content.decode("utf-8"))
            return
        _render_score(claim_id, by, resp.json())
        return
    with _open_store(data_dir) as store:
        state = store.state
        q = state.active_questionnaire()
        if claim_id not in state.claims:
            click.echo(f"error: no claim {claim_id!r}", err=True)
            sys.exit(EXIT_USER)
        profile = state.profiles.get("default", default_profile())
        if by == "assessor":
            if not assessor:
                click.echo("error: --by assessor requires --assessor", err=True)
                sys.exit(EXIT_USER)
            mine = [a for a in state.assessments.get(claim_id, [])
                    if a.assessor_id == assessor
                    and a.questionnaire_version == q.version]
            if mine:
                latest = max(mine, key=lambda a: a.created_at)
                vector = score_assessment(q, latest)
                view = views.score_view(claim_id, vector,
                                        explain(q, vector, latest), None,
                                        profile.min_coverage, by)
            else:
                view = views.score_view(claim_id, empty_vector(q), None, None,
                                        profile.min_coverage, by)
        else:
            result = consensus_scores(state, q, claim_id)
            if result is None:
                view = views.score_view(claim_id, empty_vector(q), None, None,
                                        profile.min_coverage, by)
            else:
                view = views.score_view(
                    claim_id, result.score_vector,
                    explain(q, result.score_vector, result.answers),
                    result, profile.min_coverage, by)
    if as_json:
        click.echo(_dump(view))
        return
    _render_score(claim_id, by, view)


def _render_score(claim_id, by, view):
    click.echo(f"claim {claim_id} (by {by})")
    header = f"{'dim':<22}{'score':>7}{'coverage':>10}  triggering"
    click.echo(header[:TABLE_WIDTH])
    for dim in DIMENSIONS:
        sv = view["score_vector"][dim.value]
        expl = (view["explanation"] or {}).get(dim.value, {})
        triggering = "; ".join(expl.get("triggering", []))
        line = (f"{dim.label:<22}"
                f"{_fmt_score(Fraction(sv['yes_count'], sv['answered_count']) if sv['answered_count'] else None):>7}"
                f"{sv['coverage']:>10.2f}  {triggering}")
        click.echo(line[:TABLE_WIDTH])
        for contested in expl.get("contested", []):
            click.echo(f"{'':>41}[contested] {contested}"[:TABLE_WIDTH])
    if view["disagreement"] is not None:
        click.echo(f"disagreement: {view['disagreement']:.3f}")


@main.command()
@click.option("--profile", "profile_name", default="default")
@click.option("--data-dir", default=None)
@click.option("--server", default=None, help="Remote API base URL.")
@click.option("--json", "as_json", is_flag=True)
def queue(profile_name, data_dir, server, as_json):
    """The prioritized claim queue under a profile."""
    if server:
        from urllib.parse import urlencode

        resp = _remote(server, "GET",
                       f"/api/v1/queue?{urlencode({'profile': profile_name})}")
        if as_json:
            click.echo(resp.content.decode("utf-8"))
            return
        view = resp.json()
        _render_queue(view["profile"]["name"], view["profile"]["mode"], view)
        return
    with _open_store(data_dir) as store:
        state = store.state
        q = state.active_questionnaire()
        if profile_name in state.profiles:
            profile = state.profiles[profile_name]
        elif profile_name == "default":
            profile = default_profile()
        else:
            click.echo(f"error: no profile named {profile_name!r}", err=True)
            sys.exit(EXIT_USER)
        entries = rank_queue(profile, queue_inputs(state, q))
    view = views.queue_view(profile, entries)
    if as_json:
        click.echo(_dump(view))
        return
    _render_queue(profile.name, profile.mode, view)


def _render_queue(profile_name, mode, view):
    click.echo(f"queue under profile {profile_name!r} ({mode} mode)")
    cols = "".join(f"{d.letter:>7}" for d in DIMENSIONS)
    click.echo(f"{'':>5} {'claim':<28}{cols}{'scalar':>9}  flags")
    for entry in view["entries"]:
        sv = entry["score_vector"]
        marks = []
        if entry["pareto_frontier"]:
            marks.append("frontier")
        if entry["provisional"]:
            marks.append("provisional")
        dim_cells = "".join(
            f"{_fmt_score(Fraction(sv[d.value]['yes_count'], sv[d.value]['answered_count']) if sv[d.value]['answered_count'] else None):>7}"
            for d in DIMENSIONS)
        rank = entry["rank"] if entry["rank"] is not None else "-"
        scalar = f"{entry['scalar']:.3f}" if entry["scalar"] is not None else "-"
        line = (f"{rank:>5} {entry['claim_id']:<28}{dim_cells}{scalar:>9}  "
                f"{' '.join(marks)}")
        click.echo(line[:TABLE_WIDTH])


@main.command("validate-questionnaire")
@click.argument("file", type=click.Path())
def validate_questionnaire(file):
    """Check a questionnaire document; exit 1 on validation failure."""
    try:
        source = Path(file).read_bytes()
    except OSError as e:
        click.echo(f"error: cannot read {file}: {e}", err=True)
        sys.exit(EXIT_IO)
    try:
        q = load_questionnaire(source)
    except QuestionnaireError as e:
        click.echo(f"invalid: {e}", err=True)
        sys.exit(EXIT_USER)
    counts = {d.letter: len(q.questions_for(d)) for d in DIMENSIONS}
    summary = ", ".join(f"{k}:{v}" for k, v in counts.items())
    click.echo(f"valid: version {q.version}, {len(q.questions)} questions ({summary})")


@main.command()
@click.argument("claim_id")
@click.option("--data-dir", default=None)
@click.option("--server", default=None, help="Remote API base URL.")
@click.option("--json", "as_json", is_flag=True)
def audit(claim_id, data_dir, server, as_json):
    """Chronological audit trail for one claim."""
    if server:
        resp = _remote(server, "GET", f"/api/v1/claims/{claim_id}/audit")
        if as_json:
            click.echo(resp.content.decode("utf-8"))
            return
        for e in resp.json():
            click.echo(f"{e['seq']:>5}  {e['recorded_at']}  {e['kind']}"[:TABLE_WIDTH])
        return
    with _open_store(data_dir) as store:
        if claim_id not in store.state.claims:
            click.echo(f"error: no claim {claim_id!r}", err=True)
            sys.exit(EXIT_USER)
        events = store.export_audit(claim_id)
    if as_json:
        click.echo(_dump([views.event_view(e) for e in events]))
        return
    for e in events:
        click.echo(f"{e.seq:>5}  {e.recorded_at.isoformat()}  {e.kind}"[:TABLE_WIDTH])


if __name__ == "__main__":
    main()
