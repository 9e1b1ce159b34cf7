"""Deterministic offline stand-in for a chat model.

Recognizes the three pave prompts by their ``prompt-id`` and answers from
the keyword classifier or the deterministic evaluator. Anything else gets
a plain acknowledgement.
"""
from __future__ import annotations

import json
from typing import Sequence

from .llm_client import ChatMessage


def stub_reply(messages: Sequence[ChatMessage]) -> str:
    from .enrichment import Dossier
    from .evaluator import evaluate_deterministic
    from .tasking import keyword_classify, merge_tags, prompt_id, prompt_input

    pid = prompt_id(messages) or ""
    payload = prompt_input(messages)
    if payload is None:
        return "OK"
    if pid.startswith("pave/classify@"):
        tasks = json.loads(payload)
        result = [t.to_dict() for t in keyword_classify(tasks)]
        return "Classified by keyword rules.\n" + json.dumps(result, sort_keys=True)
    if pid.startswith("pave/aggregate@"):
        tags = merge_tags(keyword_classify(json.loads(payload)))
        return json.dumps({"osm_tags": tags}, sort_keys=True)
    if pid.startswith("pave/evaluate@"):
        decision = evaluate_deterministic(Dossier.from_json(payload))
        return "Applied the decision hierarchy.\n" + decision.to_json()
    return "OK"
