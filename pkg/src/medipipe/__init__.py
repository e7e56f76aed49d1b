"""medipipe: clinical dialogue capture, SOAP note generation, retrieval,
and a from-scratch summarization evaluation harness."""

from .chunking import Chunk, ChunkConfig, split_text, validate_chunks
from .corpus import Corpus, CorpusStats, DialogueRecord, load_corpus, normalize_text, tokenize
from .metrics import (
    BertScoreTriple,
    EvalRow,
    RougeScore,
    bertscore,
    evaluate_system,
    lcs_length,
    render_report,
    rouge_l,
    rouge_lsum,
    rouge_n,
)
from .providers import (
    GenerationRequest,
    MockAsrProvider,
    MockEmbeddingProvider,
    MockGenerationProvider,
    ProviderEndpoint,
    mock_embed,
    mock_generate,
)
from .rag import Answer, RagConfig, answer_query, assemble_prompt, generate_note, ingest_note
from .soap import (
    InstructionTemplate,
    SoapNote,
    build_instruction_prompt,
    export_note,
    make_note,
    parse_note_text,
    render_note,
)
from .transcript import Segment, Speaker, TranscriptSession
from .tuning import FinetuneSpec, emit_finetune_spec, parse_finetune_spec
from .vindex import IndexEntry, SearchHit, VectorIndex

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "BertScoreTriple",
    "Chunk",
    "ChunkConfig",
    "Corpus",
    "CorpusStats",
    "DialogueRecord",
    "EvalRow",
    "FinetuneSpec",
    "GenerationRequest",
    "IndexEntry",
    "InstructionTemplate",
    "MockAsrProvider",
    "MockEmbeddingProvider",
    "MockGenerationProvider",
    "ProviderEndpoint",
    "RagConfig",
    "RougeScore",
    "SearchHit",
    "Segment",
    "SoapNote",
    "Speaker",
    "TranscriptSession",
    "VectorIndex",
    "answer_query",
    "assemble_prompt",
    "bertscore",
    "build_instruction_prompt",
    "emit_finetune_spec",
    "evaluate_system",
    "export_note",
    "generate_note",
    "ingest_note",
    "lcs_length",
    "load_corpus",
    "make_note",
    "mock_embed",
    "mock_generate",
    "normalize_text",
    "parse_finetune_spec",
    "parse_note_text",
    "render_note",
    "render_report",
    "rouge_l",
    "rouge_lsum",
    "rouge_n",
    "split_text",
    "tokenize",
    "validate_chunks",
]
