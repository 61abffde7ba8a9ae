"""Model gateway: prompt templates, JSON extraction, HTTP and mock backends.

Every model role renders one embedded template. The http backend speaks the
common chat-completion wire shape; the mock backend replays a recorded
transcript keyed by a hash of (role, rendered prompt), which makes whole
pipeline runs reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable, Mapping

import httpx

ROLES = (
    "instructor_computation",
    "instructor_proof",
    "coder_plotcode",
    "judge",
    "debias_step1",
    "debias_step2",
    "cot_rewrite",
    "image_qc",
    "caption",
)

ROLE_TEMPERATURE = {
    "instructor_computation": 0.7,
    "instructor_proof": 0.7,
    "coder_plotcode": 0.2,
    "judge": 0.0,
    "debias_step1": 0.0,
    "debias_step2": 0.0,
    "cot_rewrite": 0.0,
    "image_qc": 0.0,
    "caption": 0.0,
}

_SYSTEM_MESSAGE = "Follow the instructions exactly and output only what they ask for."

_PLACEHOLDER_RE = re.compile(r"\{([a-z][a-z0-9_]*)\}")


class TemplateError(ValueError):
    pass


class ExtractionError(ValueError):
    pass


class GatewayUnavailable(RuntimeError):
    pass


class MockMiss(KeyError):
    def __init__(self, role: str, prompt_hash: str) -> None:
        self.role = role
        self.prompt_hash = prompt_hash
        super().__init__(f"no transcript entry for role={role} hash={prompt_hash}")


def load_template(role: str) -> str:
    if role not in ROLES:
        raise TemplateError(f"unknown role {role!r}")
    path = resources.files("geoforge").joinpath(f"prompts/{role}.txt")
    return path.read_text("utf-8")


def render_prompt(role: str, vars: Mapping[str, str]) -> str:
    """Fill a role's template. Every placeholder must be covered."""
    template = load_template(role)
    missing = set()

    def sub(m: re.Match) -> str:
        name = m.group(1)
        if name not in vars:
            missing.add(name)
            return m.group(0)
        return str(vars[name])

    rendered = _PLACEHOLDER_RE.sub(sub, template)
    if missing:
        raise TemplateError(f"{role}: unfilled placeholders {sorted(missing)}")
    return rendered


def prompt_hash(role: str, prompt: str) -> str:
    h = hashlib.sha256()
    h.update(role.encode("utf-8"))
    h.update(b"\x00")
    h.update(prompt.encode("utf-8"))
    return h.hexdigest()


def extract_json(text: str) -> Any:
    """First balanced, parseable JSON object in the text.

    Code fences are stripped; prose before and after the object is ignored.
    String contents and escapes are honored while balancing braces.
    """
    s = text.strip()
    if s.startswith("```"):
        lines = s.splitlines()
        if lines and lines[0].startswith("```"):
            lines = lines[1:]
        if lines and lines[-1].strip() == "```":
            lines = lines[:-1]
        s = "\n".join(lines)
    starts = [i for i, ch in enumerate(s) if ch == "{"]
    for start in starts:
        depth = 0
        in_str = False
        escaped = False
        for i in range(start, len(s)):
            ch = s[i]
            if in_str:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_str = False
                continue
            if ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        return json.loads(s[start : i + 1])
                    except json.JSONDecodeError:
                        break
        # unbalanced or unparseable from this start; try the next one
    raise ExtractionError("no balanced JSON object found")


@dataclass(frozen=True)
class GatewayConfig:
    backend: str = "mock"
    endpoint: str = ""
    model: str = ""
    temperature: float | None = None
    max_retries: int = 2
    timeout: float = 30.0
    concurrency: int = 4
    transcript_path: str | None = None
    api_key_env: str = "GEOFORGE_API_KEY"

    def validate(self) -> None:
        if self.backend not in ("http", "mock"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        if self.backend == "http" and not self.endpoint:
            raise ValueError("http backend needs an endpoint")

    @classmethod
    def from_dict(cls, d: Mapping) -> "GatewayConfig":
        cfg = cls(**{k: d[k] for k in d if k in cls.__dataclass_fields__})
        cfg.validate()
        return cfg


def load_transcript(path: str) -> dict[str, str]:
    """JSONL rows {role, prompt_hash, response} keyed by prompt_hash."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            out[row["prompt_hash"]] = row["response"]
    return out


def save_transcript(rows: Iterable[Mapping[str, str]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(dict(row), ensure_ascii=False, sort_keys=True) + "\n")


@dataclass(frozen=True)
class JudgeVerdict:
    passed: bool
    reason: str

    def to_dict(self) -> dict:
        return {"passed": self.passed, "reason": self.reason}


class Gateway:
    """Shared, thread-safe client for every model role."""

    def __init__(
        self,
        cfg: GatewayConfig,
        transcript: Mapping[str, str] | None = None,
        recorder: list[dict[str, str]] | None = None,
    ) -> None:
        cfg.validate()
        self.cfg = cfg
        if transcript is None and cfg.backend == "mock":
            if cfg.transcript_path is None:
                raise GatewayUnavailable("mock backend needs a transcript")
            transcript = load_transcript(cfg.transcript_path)
        self._transcript = transcript or {}
        self._recorder = recorder
        self._record_lock = threading.Lock()
        self._gate = threading.BoundedSemaphore(cfg.concurrency)

    def complete(self, role: str, vars: Mapping[str, str]) -> str:
        prompt = render_prompt(role, vars)
        if self.cfg.backend == "mock":
            key = prompt_hash(role, prompt)
            if key not in self._transcript:
                raise MockMiss(role, key)
            response = self._transcript[key]
        else:
            response = self._complete_http(role, prompt)
        if self._recorder is not None:
            with self._record_lock:
                self._recorder.append(
                    {
                        "role": role,
                        "prompt_hash": prompt_hash(role, prompt),
                        "response": response,
                    }
                )
        return response

    def _complete_http(self, role: str, prompt: str) -> str:
        temp = self.cfg.temperature
        if temp is None:
            temp = ROLE_TEMPERATURE[role]
        payload = {
            "model": self.cfg.model,
            "messages": [
                {"role": "system", "content": _SYSTEM_MESSAGE},
                {"role": "user", "content": prompt},
            ],
            "temperature": temp,
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last_error: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                time.sleep(0.25 * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = httpx.post(
                        self.cfg.endpoint,
                        json=payload,
                        headers=headers,
                        timeout=self.cfg.timeout,
                    )
            except httpx.HTTPError as e:
                last_error = e
                continue
            if resp.status_code >= 500:
                last_error = GatewayUnavailable(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise GatewayUnavailable(f"request rejected: {resp.status_code}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, json.JSONDecodeError) as e:
                raise GatewayUnavailable(f"malformed completion payload: {e}") from e
        raise GatewayUnavailable(f"transport exhausted after retries: {last_error}")

    def complete_json(self, role: str, vars: Mapping[str, str]) -> Any:
        return extract_json(self.complete(role, vars))

    def judge(self, question: str, cot: str, answer: str) -> JudgeVerdict:
        """Self-consistency verdict; malformed output counts as failure."""
        text = self.complete(
            "judge", {"question": question, "cot": cot, "answer": answer}
        )
        try:
            obj = extract_json(text)
        except ExtractionError:
            return JudgeVerdict(False, "malformed verdict")
        passed = obj.get("passed") if isinstance(obj, dict) else None
        if not isinstance(passed, bool):
            return JudgeVerdict(False, "malformed verdict")
        reason = obj.get("reason", "")
        if not isinstance(reason, str):
            reason = ""
        return JudgeVerdict(passed, reason)
