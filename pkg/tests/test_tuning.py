from __future__ import annotations

import json

import pytest

from medipipe.errors import ValidationError
from medipipe.tuning import DEFAULT_TARGET_MODULES, FinetuneSpec, emit_finetune_spec, parse_finetune_spec


def test_defaults_match_expected_hyperparameters():
    spec = FinetuneSpec()
    assert spec.rank_r == 16
    assert spec.lora_alpha == 16
    assert spec.quant_bits == 4
    assert len(spec.target_modules) == 7
    assert spec.target_modules == (
        "q_proj",
        "k_proj",
        "v_proj",
        "o_proj",
        "gate_proj",
        "up_proj",
        "down_proj",
    )


def test_emit_document_fields():
    document = emit_finetune_spec(FinetuneSpec())
    payload = json.loads(document)
    assert payload["schema_version"] == 1
    assert payload["rank_r"] == 16
    assert payload["lora_alpha"] == 16
    assert payload["quant_bits"] == 4
    assert payload["target_modules"] == list(DEFAULT_TARGET_MODULES)


def test_emit_is_key_sorted_and_deterministic():
    document = emit_finetune_spec(FinetuneSpec())
    assert document == emit_finetune_spec(FinetuneSpec())
    keys = list(json.loads(document).keys())
    assert keys == sorted(keys)


def test_validation_errors_name_the_field():
    with pytest.raises(ValidationError) as excinfo:
        FinetuneSpec(rank_r=0)
    assert "rank_r" in str(excinfo.value)
    with pytest.raises(ValidationError) as excinfo:
        FinetuneSpec(quant_bits=3)
    assert "quant_bits" in str(excinfo.value)
    with pytest.raises(ValidationError):
        FinetuneSpec(target_modules=())
    with pytest.raises(ValidationError):
        FinetuneSpec(base_model="")


def test_parse_back_reconstructs_equal_spec():
    spec = FinetuneSpec(base_model="m", dataset_ref="corpus-v2", extra={"epochs": 3})
    assert parse_finetune_spec(emit_finetune_spec(spec)) == spec


def test_parse_rejects_unknown_schema_version():
    document = emit_finetune_spec(FinetuneSpec()).replace('"schema_version": 1', '"schema_version": 9')
    with pytest.raises(ValidationError):
        parse_finetune_spec(document)
