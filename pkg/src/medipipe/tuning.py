"""Fine-tuning job specifications for an external training system.

Training never happens in-process; this module only validates and
serializes the job description (low-rank adapter and quantization
hyperparameters) that a trainer consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ValidationError

SCHEMA_VERSION = 1

DEFAULT_TARGET_MODULES = (
    "q_proj",
    "k_proj",
    "v_proj",
    "o_proj",
    "gate_proj",
    "up_proj",
    "down_proj",
)


@dataclass(frozen=True)
class FinetuneSpec:
    base_model: str = "llama3-8b"
    rank_r: int = 16
    lora_alpha: int = 16
    target_modules: tuple[str, ...] = DEFAULT_TARGET_MODULES
    quant_bits: int = 4
    instruction_template_id: str = "soap-v1"
    dataset_ref: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.base_model:
            raise ValidationError("base_model must be nonempty")
        if self.rank_r < 1:
            raise ValidationError(f"rank_r must be >= 1, got {self.rank_r}")
        if self.lora_alpha < 1:
            raise ValidationError(f"lora_alpha must be >= 1, got {self.lora_alpha}")
        if self.quant_bits not in (4, 8, 16):
            raise ValidationError(f"quant_bits must be one of 4, 8, 16, got {self.quant_bits}")
        if not self.target_modules:
            raise ValidationError("target_modules must be nonempty")


def emit_finetune_spec(cfg: FinetuneSpec) -> str:
    """Serialize to deterministic key-sorted JSON with a schema version."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "base_model": cfg.base_model,
        "rank_r": cfg.rank_r,
        "lora_alpha": cfg.lora_alpha,
        "target_modules": list(cfg.target_modules),
        "quant_bits": cfg.quant_bits,
        "instruction_template_id": cfg.instruction_template_id,
        "dataset_ref": cfg.dataset_ref,
        "extra": dict(cfg.extra),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def parse_finetune_spec(document: str) -> FinetuneSpec:
    """Parse an emitted document back into an equal FinetuneSpec."""
    payload = json.loads(document)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported finetune spec schema_version {version!r}")
    return FinetuneSpec(
        base_model=payload["base_model"],
        rank_r=payload["rank_r"],
        lora_alpha=payload["lora_alpha"],
        target_modules=tuple(payload["target_modules"]),
        quant_bits=payload["quant_bits"],
        instruction_template_id=payload["instruction_template_id"],
        dataset_ref=payload["dataset_ref"],
        extra=dict(payload.get("extra", {})),
    )
