"""Agents (instructor, editor, generator), backends and prompt construction."""

from .backends import (
    Backend,
    Completion,
    CompletionRequest,
    HTTPBackend,
    ScriptedBackend,
    complete,
    prompt_digest,
)
from .mock import apply_ops, mock_edit
from .prompts import (
    FewShotExample,
    FewShotPool,
    PromptBudget,
    build_edit_prompt,
    build_instruction_prompt,
    instruction_prompt_with_count,
)
from .roles import (
    Editor,
    EditorOutput,
    HumanInstructor,
    Instructor,
    InstructorOutput,
    LLMEditor,
    LLMGenerator,
    LLMInstructor,
    MockEditor,
    OracleInstructor,
    ScriptedInstructor,
    instruction_ops,
)

__all__ = [
    "Backend",
    "Completion",
    "CompletionRequest",
    "Editor",
    "EditorOutput",
    "FewShotExample",
    "FewShotPool",
    "HTTPBackend",
    "HumanInstructor",
    "Instructor",
    "InstructorOutput",
    "LLMEditor",
    "LLMGenerator",
    "LLMInstructor",
    "MockEditor",
    "OracleInstructor",
    "PromptBudget",
    "ScriptedBackend",
    "ScriptedInstructor",
    "apply_ops",
    "build_edit_prompt",
    "build_instruction_prompt",
    "complete",
    "instruction_ops",
    "instruction_prompt_with_count",
    "mock_edit",
    "prompt_digest",
]
