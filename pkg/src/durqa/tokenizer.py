"""Deterministic tokenization and approximate token counting.

One tokenizer is shared by the lexical index, the hashing mock embedder,
and drug-name normalization so that every component segments text the
same way. CJK runs are indexed as overlapping character bigrams because
whitespace alone under-segments Korean clinical text.
"""
from __future__ import annotations

import re
import unicodedata

# Han, Hangul (jamo + syllables), Hiragana, Katakana.
_CJK_RANGES = "ᄀ-ᇿ぀-ヿ㐀-䶿一-鿿가-힣豈-﫿"

_CJK_CHAR = re.compile(rf"[{_CJK_RANGES}]")
# One atom is either a single CJK character or a maximal run of non-CJK word chars.
_ATOM = re.compile(rf"[{_CJK_RANGES}]|(?:(?![{_CJK_RANGES}])\w)+")


def normalize_text(text: str) -> str:
    """NFC-normalize and case-fold; the canonical form for all matching."""
    return unicodedata.normalize("NFC", text).casefold()


def tokenize(text: str) -> list[str]:
    """Split text into lexical tokens.

    Non-CJK word segments become single tokens. A maximal run of CJK
    characters becomes its overlapping character bigrams (a run of one
    character becomes itself). Punctuation is dropped.
    """
    norm = normalize_text(text)
    tokens: list[str] = []
    run: list[str] = []
    run_end = -1

    def flush() -> None:
        if not run:
            return
        if len(run) == 1:
            tokens.append(run[0])
        else:
            tokens.extend(run[i] + run[i + 1] for i in range(len(run) - 1))
        run.clear()

    for m in _ATOM.finditer(norm):
        atom = m.group()
        if len(atom) == 1 and _CJK_CHAR.match(atom):
            if m.start() != run_end:
                flush()
            run.append(atom)
            run_end = m.end()
        else:
            flush()
            run_end = -1
            tokens.append(atom)
    flush()
    return tokens


def count_tokens(text: str) -> int:
    """Approximate token count: non-CJK word segments count once, CJK
    characters count one each. Deterministic and dependency-free; used
    to enforce chunk length bounds."""
    return len(_ATOM.findall(unicodedata.normalize("NFC", text)))
