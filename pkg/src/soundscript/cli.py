"""Command-line surface: validate, compile, render, write, chat."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .backends import BackendConfig, make_backend
from .chat import ChatSession
from .errors import BackendError, ScriptWritingFailed, SoundscriptError
from .executor import execute
from .plan import compile_script, plan_to_json, plan_to_text
from .script import serialize_script, validate_text
from .audio.wavio import write_wav
from .voices import allocate_voices, load_catalog
from .writer import HttpLlmClient, ReplayClient, WriteRequest, write_script

EXIT_VALIDATION = 1
EXIT_BACKEND = 3
EXIT_WRITING = 4


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _backend_from_options(config: dict, backend: str, seed: int) -> BackendConfig:
    cfg = config.get("backend", {})
    kind = backend or cfg.get("kind", "synthetic")
    if kind == "synthetic":
        return BackendConfig(kind="synthetic", seed=seed)
    return BackendConfig(
        kind="http",
        tts_url=cfg.get("tts_url"),
        music_url=cfg.get("music_url"),
        sfx_url=cfg.get("sfx_url"),
        timeout=cfg.get("timeout", 60.0),
        retries=cfg.get("retries", 2),
    )


def _llm_client(config: dict, replay):
    if replay is not None:
        return ReplayClient.from_file(replay)
    llm = config.get("llm", {})
    base_url = llm.get("base_url")
    if not base_url:
        raise click.UsageError("no LLM configured: pass --replay or set llm.base_url in --config")
    return HttpLlmClient(base_url, llm.get("model", "gpt-4"),
                         api_key_env=llm.get("api_key_env", "LLM_API_KEY"))


def _check_script(path: Path, lenient: bool, close_spans: bool):
    script, report = validate_text(path.read_text(), lenient=lenient,
                                   close_open_spans=close_spans)
    return script, report


@click.group()
def main():
    """Compile and render structured audio scripts."""


@main.command("validate")
@click.argument("script_path", type=click.Path(exists=True, path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@click.option("--lenient", is_flag=True, help="Warn on unknown node keys instead of failing.")
@click.option("--auto-close", is_flag=True, help="Insert implicit ends for open background spans.")
def cmd_validate(script_path, as_json, lenient, auto_close):
    """Validate a script file; exit 0 iff it has no errors."""
    _, report = _check_script(script_path, lenient, auto_close)
    if as_json:
        click.echo(json.dumps(report.as_dict(), indent=2))
    else:
        click.echo(report.summary())
    sys.exit(0 if report.ok else EXIT_VALIDATION)


@main.command("compile")
@click.argument("script_path", type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output stem for plan files (default: script path without suffix).")
@click.option("--voices", "voices_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Voice catalog JSON file.")
@click.option("--lenient", is_flag=True)
@click.option("--auto-close", is_flag=True)
def cmd_compile(script_path, out, voices_path, lenient, auto_close):
    """Compile a script into a plan listing (.plan.txt) and JSON dump (.plan.json)."""
    script, report = _check_script(script_path, lenient, auto_close)
    if not report.ok:
        click.echo(report.summary(), err=True)
        sys.exit(EXIT_VALIDATION)
    catalog = load_catalog(voices_path)
    voices = allocate_voices(script, catalog)
    plan = compile_script(script, voices)
    stem = out if out is not None else script_path.with_suffix("")
    listing_path = Path(f"{stem}.plan.txt")
    json_path = Path(f"{stem}.plan.json")
    listing_path.write_text(plan_to_text(plan))
    json_path.write_text(plan_to_json(plan) + "\n")
    click.echo(f"plan written to {listing_path} and {json_path}")


@main.command("render")
@click.argument("script_path", type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output WAV path (default: script path with .wav suffix).")
@click.option("--backend", type=click.Choice(["synthetic", "http"]), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--emit-plan", is_flag=True, help="Also write the plan listing and JSON dump.")
@click.option("--master-lufs", type=float, default=None,
              help="Normalize the final mix to this integrated loudness.")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--voices", "voices_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--lenient", is_flag=True)
@click.option("--auto-close", is_flag=True)
def cmd_render(script_path, out, backend, seed, jobs, emit_plan, master_lufs,
               config_path, voices_path, lenient, auto_close):
    """Render a script end to end: cast, compile, execute, write WAV + report."""
    config = _load_config(config_path)
    script, report = _check_script(script_path, lenient, auto_close)
    if not report.ok:
        click.echo(report.summary(), err=True)
        sys.exit(EXIT_VALIDATION)
    catalog = load_catalog(voices_path or config.get("voice_catalog"))
    voices = allocate_voices(script, catalog)
    plan = compile_script(script, voices)
    out = out if out is not None else script_path.with_suffix(".wav")
    if emit_plan:
        Path(f"{out.with_suffix('')}.plan.txt").write_text(plan_to_text(plan))
        Path(f"{out.with_suffix('')}.plan.json").write_text(plan_to_json(plan) + "\n")

    backend_config = _backend_from_options(config, backend, seed)
    engine_backend = make_backend(backend_config)
    try:
        buffer, render_report = execute(
            plan, engine_backend, jobs=jobs,
            master_lufs=master_lufs if master_lufs is not None else config.get("master_lufs"),
        )
    except (BackendError, SoundscriptError) as exc:
        step = getattr(exc, "step", None)
        where = f" (step {step})" if step is not None else ""
        click.echo(f"render failed{where}: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    write_wav(buffer, out)
    report_path = Path(f"{out}.report.json")
    report_path.write_text(json.dumps(render_report.as_dict(), indent=2) + "\n")
    click.echo(f"wrote {out} ({buffer.duration:.2f} s)")
    gen_time = sum(s.seconds for s in render_report.steps
                   if s.op in ("genspeech", "genaudio"))
    click.echo(f"generation {gen_time:.3f} s, report at {report_path}")
    for warning in render_report.warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command("write")
@click.argument("instruction")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Where to save the validated script.")
@click.option("--duration", type=float, default=None,
              help="Ask for this total duration in seconds.")
@click.option("--max-retries", type=int, default=2, show_default=True)
@click.option("--replay", type=click.Path(exists=True, path_type=Path), default=None,
              help="Replay canned LLM responses from this JSON file.")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
def cmd_write(instruction, out, duration, max_retries, replay, config_path):
    """Generate a validated script from a plain-language instruction."""
    config = _load_config(config_path)
    client = _llm_client(config, replay)
    try:
        script, attempts = write_script(
            WriteRequest(instruction=instruction, duration_hint=duration,
                         max_retries=max_retries),
            client,
        )
    except ScriptWritingFailed as exc:
        click.echo(f"script writing failed after {exc.attempts} attempt(s): {exc}", err=True)
        sys.exit(EXIT_WRITING)
    out.write_text(serialize_script(script) + "\n")
    click.echo(f"wrote {out} after {attempts} attempt(s)")


@main.command("chat")
@click.option("--script", "script_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Start from an existing script.")
@click.option("--replay", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--transcript", type=click.Path(path_type=Path), default="chat_transcript.json",
              show_default=True)
@click.option("--backend", type=click.Choice(["synthetic", "http"]), default="synthetic")
@click.option("--seed", type=int, default=0)
def cmd_chat(script_path, replay, config_path, transcript, backend, seed):
    """Interactive co-creation loop.

    Type an edit instruction per line; `render` renders the current
    script, `show` prints it, `quit` saves the transcript and exits.
    """
    config = _load_config(config_path)
    client = _llm_client(config, replay)
    session = ChatSession(client=client)
    if script_path is not None:
        script, report = _check_script(script_path, lenient=True, close_spans=False)
        if not report.ok:
            click.echo(report.summary(), err=True)
            sys.exit(EXIT_VALIDATION)
        session.script = script

    while True:
        try:
            line = click.prompt("", prompt_suffix="> ", default="", show_default=False)
        except (EOFError, click.Abort):
            break
        line = line.strip()
        if not line:
            continue
        if line == "quit":
            break
        if line == "show":
            click.echo(serialize_script(session.script) if session.script else "[]")
            continue
        if line == "render":
            if session.script is None:
                click.echo("nothing to render yet")
                continue
            script_file = Path("chat_script.json")
            script_file.write_text(serialize_script(session.script) + "\n")
            ctx = click.get_current_context()
            try:
                ctx.invoke(cmd_render, script_path=script_file, out=Path("chat_render.wav"),
                           backend=backend, seed=seed, jobs=1, emit_plan=False,
                           master_lufs=None, config_path=config_path, voices_path=None,
                           lenient=True, auto_close=False)
            except SystemExit:
                click.echo("render failed; session continues")
            continue
        accepted, detail = session.revise(line)
        click.echo(detail)

    Path(transcript).write_text(json.dumps(session.transcript(), indent=2) + "\n")
    click.echo(f"transcript saved to {transcript}")


if __name__ == "__main__":
    main()
