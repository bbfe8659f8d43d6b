"""Blinded judge prompts, backends, verdict parsing, and consensus voting."""

from .backends import HttpChatBackend, JudgeBackend, ScriptedBackend
from .consensus import (
    ConsensusConfig,
    ConsensusResult,
    Decision,
    adjudicate_corpus,
    run_consensus,
)
from .prompts import (
    BINARY_KINDS,
    PRIMARY_KINDS,
    BlindingMap,
    NoteOrder,
    PromptKind,
    make_blinding,
    render_prompt,
)
from .verdicts import CssRecord, JudgeVerdict, Outcome, parse_binary_verdict, parse_css

__all__ = [
    "BINARY_KINDS",
    "PRIMARY_KINDS",
    "BlindingMap",
    "ConsensusConfig",
    "ConsensusResult",
    "CssRecord",
    "Decision",
    "HttpChatBackend",
    "JudgeBackend",
    "JudgeVerdict",
    "NoteOrder",
    "Outcome",
    "PromptKind",
    "ScriptedBackend",
    "adjudicate_corpus",
    "make_blinding",
    "parse_binary_verdict",
    "parse_css",
    "render_prompt",
    "run_consensus",
]
