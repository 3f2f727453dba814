"""Text regressor: pluggable sequence encoder plus a small regression head.

Any encoder producing a 512-d pooled embedding can sit behind the head.
Two implementations ship: a small trainable transformer stub with a
corpus-built tokenizer (the desk-scale default), and an adapter over an
externally supplied pretrained bidirectional-transformer checkpoint.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from autorater.models.common import seeded

POOLED_DIM = 512
PAD_ID = 0
UNK_ID = 1

_TOKEN_RE = re.compile(r"[a-z0-9]+|[^\sa-z0-9]")


@dataclass
class TextHeadConfig:
    dropout_p: float = 0.1
    dense_dim: int = 100

    def to_json(self) -> dict:
        return {"dropout_p": self.dropout_p, "dense_dim": self.dense_dim}


class StubTokenizer:
    """Lowercase word/punctuation tokenizer over a corpus-built vocabulary.

    Token ids 0 and 1 are reserved for padding and unknown words.
    Sequences longer than ``max_len`` are truncated from the tail.
    """

    def __init__(self, vocab: dict[str, int], max_len: int = 256):
        self.vocab = vocab
        self.max_len = max_len

    @classmethod
    def build(cls, texts: list[str], max_len: int = 256, max_vocab: int = 20000) -> "StubTokenizer":
        counts: dict[str, int] = {}
        for text in texts:
            for tok in _TOKEN_RE.findall(text.lower()):
                counts[tok] = counts.get(tok, 0) + 1
        words = sorted(counts, key=lambda w: (-counts[w], w))[: max_vocab - 2]
        vocab = {"<pad>": PAD_ID, "<unk>": UNK_ID}
        for w in words:
            vocab[w] = len(vocab)
        return cls(vocab, max_len=max_len)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def tokenize_with_spans(self, text: str) -> tuple[list[int], list[tuple[int, int]]]:
        ids, spans = [], []
        for match in _TOKEN_RE.finditer(text.lower()):
            ids.append(self.vocab.get(match.group(), UNK_ID))
            spans.append(match.span())
            if len(ids) == self.max_len:
                break
        return ids, spans

    def tokenize(self, text: str) -> list[int]:
        return self.tokenize_with_spans(text)[0]

    def encode_batch(self, texts: list[str], length: int | None = None) -> tuple[torch.Tensor, torch.Tensor]:
        """Pad a batch of texts to a common length; returns (ids, mask)."""
        seqs = [self.tokenize(t) for t in texts]
        n = length or max((len(s) for s in seqs), default=1) or 1
        ids = torch.full((len(texts), n), PAD_ID, dtype=torch.long)
        mask = torch.zeros((len(texts), n), dtype=torch.bool)
        for i, seq in enumerate(seqs):
            seq = seq[:n]
            ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
            mask[i, : len(seq)] = True
        return ids, mask

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({"vocab": self.vocab, "max_len": self.max_len}), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "StubTokenizer":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(vocab=d["vocab"], max_len=d["max_len"])


class _Block(nn.Module):
    """Pre-norm transformer block."""

    def __init__(self, width: int, heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(width)
        self.attn = nn.MultiheadAttention(width, heads, batch_first=True)
        self.ln2 = nn.LayerNorm(width)
        self.ffn = nn.Sequential(nn.Linear(width, 4 * width), nn.ReLU(), nn.Linear(4 * width, width))

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, key_padding_mask=~mask, need_weights=False)
        x = x + attn_out
        return x + self.ffn(self.ln2(x))


class StubTextEncoder(nn.Module):
    """Small trainable transformer: embeddings, blocks, mean pool, project.

    Defaults: 2 blocks, 4 heads, width 128, mean-pooled over real tokens,
    projected to the 512-d pooled dimension.
    """

    trainable = True

    def __init__(
        self,
        tokenizer: StubTokenizer,
        width: int = 128,
        blocks: int = 2,
        heads: int = 4,
        init_seed: int = 0,
    ):
        super().__init__()
        self.tokenizer = tokenizer
        self.width = width
        with seeded(init_seed):
            self.embedding = nn.Embedding(tokenizer.vocab_size, width, padding_idx=PAD_ID)
            self.blocks = nn.ModuleList(_Block(width, heads) for _ in range(blocks))
            self.proj = nn.Linear(width, POOLED_DIM)

    @property
    def pooled_dim(self) -> int:
        return POOLED_DIM

    @property
    def max_len(self) -> int:
        return self.tokenizer.max_len

    def tokenize(self, text: str) -> list[int]:
        return self.tokenizer.tokenize(text)

    def embed_tokens(self, token_ids: torch.Tensor) -> torch.Tensor:
        return self.embedding(token_ids)

    def encode_embedded(self, embedded: torch.Tensor, token_mask: torch.Tensor) -> torch.Tensor:
        """Pool already-embedded token sequences; attribution entry point."""
        h = embedded
        for block in self.blocks:
            h = block(h, token_mask)
        weights = token_mask.to(h.dtype).unsqueeze(-1)
        pooled = (h * weights).sum(dim=1) / weights.sum(dim=1).clamp_min(1.0)
        return self.proj(pooled)

    def forward(self, token_ids: torch.Tensor, token_mask: torch.Tensor) -> torch.Tensor:
        return self.encode_embedded(self.embed_tokens(token_ids), token_mask)


class PretrainedTextEncoderAdapter(nn.Module):
    """Adapter over a pretrained bidirectional-transformer checkpoint.

    Requires the ``transformers`` package and a local or hub checkpoint.
    The pooled output is passed through unchanged when the checkpoint's
    hidden size is already 512 and linearly projected otherwise. All
    checkpoint layers stay trainable (unfrozen).
    """

    trainable = True

    def __init__(self, checkpoint: str, max_len: int = 256):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ImportError("PretrainedTextEncoderAdapter needs the 'transformers' package") from exc
        self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModel.from_pretrained(checkpoint)
        self.checkpoint = checkpoint
        self.max_len = max_len
        hidden = self.model.config.hidden_size
        self.proj = nn.Identity() if hidden == POOLED_DIM else nn.Linear(hidden, POOLED_DIM)

    @property
    def pooled_dim(self) -> int:
        return POOLED_DIM

    def tokenize(self, text: str) -> list[int]:
        return self._tokenizer.encode(text, truncation=True, max_length=self.max_len)

    def embed_tokens(self, token_ids: torch.Tensor) -> torch.Tensor:
        return self.model.get_input_embeddings()(token_ids)

    def encode_embedded(self, embedded: torch.Tensor, token_mask: torch.Tensor) -> torch.Tensor:
        out = self.model(inputs_embeds=embedded, attention_mask=token_mask.long())
        pooled = out.pooler_output if getattr(out, "pooler_output", None) is not None else out.last_hidden_state[:, 0]
        return self.proj(pooled)

    def forward(self, token_ids: torch.Tensor, token_mask: torch.Tensor) -> torch.Tensor:
        out = self.model(input_ids=token_ids, attention_mask=token_mask.long())
        pooled = out.pooler_output if getattr(out, "pooler_output", None) is not None else out.last_hidden_state[:, 0]
        return self.proj(pooled)


class TextNet(nn.Module):
    input_keys = ("token_ids", "token_mask")
    modality = "text"

    def __init__(
        self, encoder: nn.Module, head_config: TextHeadConfig | None = None, init_seed: int = 0, head_bias: float = 5.0
    ):
        super().__init__()
        self._check_encoder(encoder)
        self.encoder = encoder
        self.head_config = head_config or TextHeadConfig()
        with seeded(init_seed):
            self.drop = nn.Dropout(self.head_config.dropout_p)
            self.fc = nn.Linear(POOLED_DIM, self.head_config.dense_dim)
            self.head = nn.Linear(self.head_config.dense_dim, 1)
        with torch.no_grad():
            self.head.bias.fill_(head_bias)

    @staticmethod
    def _check_encoder(encoder: nn.Module) -> None:
        dim = getattr(encoder, "pooled_dim", None)
        if dim != POOLED_DIM:
            raise ValueError(f"pooled dimension {dim} != {POOLED_DIM}")

    @property
    def embedding_dim(self) -> int:
        return self.head_config.dense_dim

    def swap_encoder(self, encoder: nn.Module) -> "TextNet":
        """Replace the encoder in place, keeping head weights untouched."""
        self._check_encoder(encoder)
        self.encoder = encoder
        return self

    def _head_from_pooled(self, pooled: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        emb = torch.relu(self.fc(self.drop(pooled)))
        score = torch.relu(self.head(emb)).squeeze(-1)
        return emb, score

    def embed(self, token_ids: torch.Tensor, token_mask: torch.Tensor) -> torch.Tensor:
        return self._head_from_pooled(self.encoder(token_ids, token_mask))[0]

    def forward(self, token_ids: torch.Tensor, token_mask: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        return self._head_from_pooled(self.encoder(token_ids, token_mask))

    def forward_text(self, text: str) -> tuple[torch.Tensor, torch.Tensor]:
        """Single-string convenience wrapper around tokenize + forward."""
        if not text:
            raise ValueError("text must be nonempty")
        ids = torch.tensor([self.encoder.tokenize(text)], dtype=torch.long)
        mask = torch.ones_like(ids, dtype=torch.bool)
        emb, score = self.forward(ids, mask)
        return emb[0], score[0]

    def forward_embedded(self, embedded: torch.Tensor, token_mask: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Forward from token embeddings; used for gradient attributions."""
        return self._head_from_pooled(self.encoder.encode_embedded(embedded, token_mask))

    def embed_from_embedded(self, embedded: torch.Tensor, token_mask: torch.Tensor) -> torch.Tensor:
        return self.forward_embedded(embedded, token_mask)[0]
