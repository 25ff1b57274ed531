"""Run configuration (TOML or JSON) and the factories that turn it into agents."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

from .agents.backends import Backend, HTTPBackend, ScriptedBackend
from .agents.prompts import DEFAULT_SHOTS, FewShotExample, FewShotPool, PromptBudget
from .agents.roles import (
    Editor,
    HumanInstructor,
    Instructor,
    LLMEditor,
    LLMGenerator,
    LLMInstructor,
    MockEditor,
    OracleInstructor,
    ScriptedInstructor,
)
from .data import load_dataset
from .errors import FatalConfigError
from .metrics import CommandExtractor, HTTPExtractor
from .oracle import build_keyword_oracle, render_editor_facing
from .reward import Scorer
from .types import DatasetRecord, RewardWeights, Scenario

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SECTIONS = ("dataset", "agents", "weights", "metrics", "prompting", "run", "train")


def load_config(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FatalConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise FatalConfigError(f"cannot parse config {path}: {exc}") from exc
    unknown = set(cfg) - set(SECTIONS)
    if unknown:
        raise FatalConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg["_base"] = str(path.parent)
    return cfg


def _path(cfg: dict[str, Any], value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else Path(cfg.get("_base", ".")) / p


def scenario_of(cfg: dict[str, Any]) -> Scenario:
    try:
        return Scenario(cfg.get("dataset", {}).get("scenario", "cnndm"))
    except ValueError as exc:
        raise FatalConfigError(str(exc)) from exc


def load_records(cfg: dict[str, Any], path: str | None = None) -> list[DatasetRecord]:
    """Dataset named by the config (relative to the config file) unless ``path`` overrides it."""
    ds = cfg.get("dataset", {})
    if path is not None:
        resolved = Path(path)
    elif ds.get("path"):
        resolved = _path(cfg, ds["path"])
    else:
        raise FatalConfigError("dataset.path is required")
    return load_dataset(resolved, scenario_of(cfg), ds.get("field_map"))


def build_weights(cfg: dict[str, Any]) -> RewardWeights:
    try:
        return RewardWeights.from_dict(cfg.get("weights", {}))
    except ValueError as exc:
        raise FatalConfigError(f"weights: {exc}") from exc


def build_scorer(cfg: dict[str, Any]) -> Scorer:
    m = cfg.get("metrics", {})
    extractor = m.get("extractor", "heuristic")
    external = None
    if extractor == "external":
        if "extractor_command" in m:
            external = CommandExtractor(m["extractor_command"])
        elif "extractor_url" in m:
            external = HTTPExtractor(m["extractor_url"])
        else:
            raise FatalConfigError("metrics.extractor = 'external' needs extractor_command or extractor_url")
    return Scorer(weights=build_weights(cfg), stem=bool(m.get("stem", False)), extractor=extractor,
                  external_extractor=external)


def build_backend(cfg: dict[str, Any], spec: dict[str, Any] | None) -> Backend:
    if not spec:
        raise FatalConfigError("agent needs a backend section")
    kind = spec.get("type", "http")
    if kind == "scripted":
        return ScriptedBackend.from_file(_path(cfg, spec["fixture"]))
    if kind == "http":
        for key in ("base_url", "model"):
            if key not in spec:
                raise FatalConfigError(f"http backend needs {key!r}")
        return HTTPBackend(
            spec["base_url"],
            spec["model"],
            path=spec.get("path", "/chat/completions"),
            api_key_env=spec.get("api_key_env", "OPENAI_API_KEY"),
            auth_header=spec.get("auth_header", "Authorization"),
            timeout=float(spec.get("timeout", 60.0)),
            max_retries=int(spec.get("max_retries", 5)),
            backoff_base=float(spec.get("backoff_base", 1.0)),
            backoff_cap=float(spec.get("backoff_cap", 30.0)),
            max_in_flight=int(spec.get("max_in_flight", 8)),
        )
    raise FatalConfigError(f"unknown backend type {kind!r}")


def build_pool(cfg: dict[str, Any], scenario: Scenario) -> FewShotPool | None:
    """Few-shot pool from a training-split dataset file; CNNDM shots use oracle instructions."""
    p = cfg.get("prompting", {})
    shots = int(p.get("shots", DEFAULT_SHOTS[scenario]))
    if shots == 0:
        return None
    if "pool_path" not in p:
        raise FatalConfigError("prompting.pool_path is required for few-shot prompting (or set shots = 0)")
    records = load_dataset(_path(cfg, p["pool_path"]), scenario, cfg.get("dataset", {}).get("field_map"))
    examples = []
    for r in records:
        if scenario is Scenario.DEFACTO:
            instruction = r.human_instruction.text if r.human_instruction else ""
        else:
            instruction = render_editor_facing(build_keyword_oracle(r.initial, r.reference, r.document), scenario)
        examples.append(FewShotExample(r.document.text, r.initial.text, instruction))
    return FewShotPool(tuple(examples), k=shots, selection=p.get("selection", "first_k"), seed=int(p.get("seed", 0)))


def build_instructor(cfg: dict[str, Any]) -> Instructor:
    spec = cfg.get("agents", {}).get("instructor", {"type": "oracle"})
    kind = spec.get("type", "oracle")
    scenario = scenario_of(cfg)
    if kind == "oracle":
        return OracleInstructor()
    if kind == "human":
        return HumanInstructor()
    if kind == "scripted":
        return ScriptedInstructor(json.loads(_path(cfg, spec["script"]).read_text(encoding="utf-8")))
    if kind == "policy":
        from .trainer import PolicyInstructor, load_policy

        return PolicyInstructor(load_policy(_path(cfg, spec["checkpoint"])))
    if kind == "llm":
        budget = PromptBudget(int(cfg.get("prompting", {}).get("limit_tokens", 4096)))
        return LLMInstructor(
            build_backend(cfg, spec.get("backend")),
            scenario,
            build_pool(cfg, scenario),
            budget,
            max_tokens=int(spec.get("max_tokens", 128)),
            temperature=float(spec.get("temperature", 0.0)),
        )
    raise FatalConfigError(f"unknown instructor type {kind!r}")


def build_editor(cfg: dict[str, Any], override: str | None = None) -> Editor:
    spec = cfg.get("agents", {}).get("editor", {"type": "mock"})
    kind = override or spec.get("type", "mock")
    if kind == "mock":
        return MockEditor()
    if kind in ("llm", "http"):
        return LLMEditor(
            build_backend(cfg, spec.get("backend")),
            max_tokens=int(spec.get("max_tokens", 512)),
            temperature=float(spec.get("temperature", 0.0)),
        )
    raise FatalConfigError(f"unknown editor type {kind!r}")


def build_generator(cfg: dict[str, Any]) -> LLMGenerator | None:
    spec = cfg.get("agents", {}).get("generator")
    if not spec:
        return None
    return LLMGenerator(build_backend(cfg, spec.get("backend")), max_tokens=int(spec.get("max_tokens", 256)))
