"""Event extraction over externally produced dependency parses.

Two kinds of events are matched per sentence: first-person action events
(ten dependency patterns, one event per anchor verb, longest pattern wins)
and a single STATE event covering the root clause, which gives perception
detection a span to scan. Negation, tense and the four perception keyword
combinations are decided here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from .belief import BeliefLexicon, PosClass
from .nature import NatureNodeId, opposite_node

FIRST_PERSON_LEMMAS = frozenset({"i", "we"})

_FEELING_NODES = frozenset({NatureNodeId.EXPERIENCE_FEELING_POS, NatureNodeId.EXPERIENCE_FEELING_NEG})
_EMOTION_NODES = frozenset({NatureNodeId.EMO_POS, NatureNodeId.EMO_NEG})


class ConlluError(Exception):
    def __init__(self, path: str, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


@dataclass(frozen=True)
class Token:
    index: int          # 1-based position
    surface: str
    lemma: str          # lowercase, taken from the parse
    pos_tag: str        # Penn Treebank tag
    head: int           # 0 = root
    deprel: str

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head == self.index:
            raise ValueError(f"token {self.index} heads itself")
        if not self.pos_tag:
            raise ValueError(f"token {self.index} has an empty POS tag")


@dataclass(frozen=True)
class ParsedSentence:
    tokens: tuple[Token, ...]
    review_id: str
    sentence_index: int

    def __post_init__(self) -> None:
        for pos, tok in enumerate(self.tokens, start=1):
            if tok.index != pos:
                raise ValueError(f"token indices not contiguous at position {pos}")
            if tok.head < 0 or tok.head > len(self.tokens):
                raise ValueError(f"token {tok.index} has dangling head {tok.head}")
        roots = [t for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root token, found {len(roots)}")

    @property
    def root(self) -> Token:
        return next(t for t in self.tokens if t.head == 0)

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def children(self, index: int) -> tuple[Token, ...]:
        return tuple(t for t in self.tokens if t.head == index)


@dataclass(frozen=True)
class Event:
    sentence: ParsedSentence
    token_indices: tuple[int, ...]   # sorted
    pattern_id: str                  # "P1".."P10" or "STATE"
    verb_index: int
    subject_lemma: str | None
    negated: bool

    def __post_init__(self) -> None:
        if self.verb_index not in self.token_indices:
            raise ValueError("verb index not part of the event span")
        if self.pattern_id != "STATE" and self.subject_lemma not in FIRST_PERSON_LEMMAS:
            raise ValueError("action events require a first-person subject")

    @property
    def text(self) -> str:
        return " ".join(self.sentence.token(i).surface for i in self.token_indices)

    def tokens(self) -> tuple[Token, ...]:
        return tuple(self.sentence.token(i) for i in self.token_indices)


class Combo(str, Enum):
    FOOD_FEELING = "food_feeling"
    FOOD_EMOTION = "food_emotion"
    FIRSTPERSON_EMOTION = "firstperson_emotion"
    EMOTIONAL_ACTION = "emotional_action"


@dataclass(frozen=True)
class PerceptionLink:
    word: str
    node: NatureNodeId
    combo: Combo
    flipped: bool = False


class Tense(Enum):
    PAST = "past"
    OTHER = "other"


_REVIEW_ID_RE = re.compile(r"^#\s*review_id\s*=\s*(.+?)\s*$")


def parse_conllu(path: str | Path) -> list[ParsedSentence]:
    """Parse a 10-column CoNLL-U style file into sentences.

    Uses columns ID, FORM, LEMMA, XPOS, HEAD and DEPREL; the rest are carried
    by the format but ignored. Sentences are blank-line separated and each
    needs a `# review_id = ...` comment.
    """
    path = Path(path)
    sentences: list[ParsedSentence] = []
    counters: dict[str, int] = {}
    review_id: str | None = None
    rows: list[tuple[int, list[str]]] = []
    start_line = 0
    line_no = 0

    def flush(at_line: int) -> None:
        nonlocal review_id, rows
        if not rows:
            review_id = None
            return
        if review_id is None:
            raise ConlluError(str(path), start_line, "sentence has no review_id comment")
        tokens = []
        for line_no, fields in rows:
            try:
                idx = int(fields[0])
                head = int(fields[6])
            except ValueError:
                raise ConlluError(str(path), line_no, "ID and HEAD must be integers") from None
            try:
                tokens.append(
                    Token(
                        index=idx,
                        surface=fields[1],
                        lemma=fields[2].lower(),
                        pos_tag=fields[4],
                        head=head,
                        deprel=fields[7],
                    )
                )
            except ValueError as exc:
                raise ConlluError(str(path), line_no, str(exc)) from None
        index = counters.get(review_id, 0)
        counters[review_id] = index + 1
        try:
            sentences.append(ParsedSentence(tuple(tokens), review_id, index))
        except ValueError as exc:
            raise ConlluError(str(path), start_line, str(exc)) from None
        review_id = None
        rows = []

    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            flush(line_no)
            continue
        if raw.startswith("#"):
            m = _REVIEW_ID_RE.match(raw)
            if m:
                review_id = m.group(1)
            continue
        fields = raw.split("\t")
        if len(fields) != 10:
            raise ConlluError(str(path), line_no, f"expected 10 tab-separated columns, got {len(fields)}")
        if not rows:
            start_line = line_no
        rows.append((line_no, fields))
    flush(line_no if rows else 0)
    return sentences


# --- action patterns -------------------------------------------------------

def _is_verb(tok: Token) -> bool:
    return tok.pos_tag.startswith("VB")


def _is_noun(tok: Token) -> bool:
    return tok.pos_tag in ("NN", "NNS", "NNP", "NNPS", "PRP")


def _is_adjectival(tok: Token) -> bool:
    # VBN covers predicative participles ("to be served")
    return tok.pos_tag.startswith("JJ") or tok.pos_tag == "VBN"


def _is_preposition(tok: Token) -> bool:
    return tok.pos_tag in ("IN", "TO")


def _is_be(tok: Token) -> bool:
    return tok.lemma == "be"


SLOT_PREDICATES: dict[str, Callable[[Token], bool]] = {
    "V": _is_verb,
    "N": _is_noun,
    "A": _is_adjectival,
    "P": _is_preposition,
    "BE": _is_be,
}


@dataclass(frozen=True)
class PatternArc:
    head_slot: str
    dep_slot: str
    deprel: str


@dataclass(frozen=True)
class ActionPattern:
    pattern_id: str
    slots: tuple[tuple[str, str], ...]       # (slot name, kind) beyond subj/v1
    arcs: tuple[PatternArc, ...]             # ordered so heads bind first

    @property
    def size(self) -> int:
        return len(self.slots) + 2           # + subj + v1

    @property
    def number(self) -> int:
        return int(self.pattern_id[1:])


ACTION_PATTERNS: tuple[ActionPattern, ...] = (
    ActionPattern("P1", (), ()),
    ActionPattern("P2", (("n2", "N"),), (PatternArc("v1", "n2", "dobj"),)),
    ActionPattern("P3", (("a", "A"),), (PatternArc("v1", "a", "xcomp"),)),
    ActionPattern(
        "P4",
        (("n2", "N"), ("n3", "N")),
        (PatternArc("v1", "n2", "iobj"), PatternArc("v1", "n3", "dobj")),
    ),
    ActionPattern(
        "P5",
        (("a1", "A"), ("be", "BE")),
        (PatternArc("v1", "a1", "xcomp"), PatternArc("a1", "be", "cop")),
    ),
    ActionPattern(
        "P6",
        (("n2", "N"), ("be", "BE")),
        (PatternArc("v1", "n2", "xcomp"), PatternArc("n2", "be", "cop")),
    ),
    ActionPattern(
        "P7",
        (("v2", "V"), ("n2", "N")),
        (PatternArc("v1", "v2", "xcomp"), PatternArc("v2", "n2", "dobj")),
    ),
    ActionPattern("P8", (("v2", "V"),), (PatternArc("v1", "v2", "xcomp"),)),
    ActionPattern(
        "P9",
        (("n2", "N"), ("p1", "P")),
        (PatternArc("v1", "n2", "nmod"), PatternArc("n2", "p1", "case"),),
    ),
    ActionPattern(
        "P10",
        (("n2", "N"), ("n3", "N"), ("p1", "P")),
        (
            PatternArc("v1", "n2", "dobj"),
            PatternArc("v1", "n3", "nmod"),
            PatternArc("n3", "p1", "case"),
        ),
    ),
)


def _bindings(
    sentence: ParsedSentence, pattern: ActionPattern, v1: Token, subj: Token
) -> list[dict[str, Token]]:
    kinds = dict(pattern.slots)
    results: list[dict[str, Token]] = []

    def extend(binding: dict[str, Token], arcs: tuple[PatternArc, ...]) -> None:
        if not arcs:
            results.append(dict(binding))
            return
        arc, rest = arcs[0], arcs[1:]
        head_tok = binding[arc.head_slot]
        predicate = SLOT_PREDICATES[kinds[arc.dep_slot]]
        used = {t.index for t in binding.values()}
        for child in sentence.children(head_tok.index):
            if child.deprel == arc.deprel and child.index not in used and predicate(child):
                binding[arc.dep_slot] = child
                extend(binding, rest)
                del binding[arc.dep_slot]

    extend({"v1": v1, "subj": subj}, pattern.arcs)
    return results


def match_action_patterns(sentence: ParsedSentence) -> list[Event]:
    """Match the ten first-person action patterns.

    Every verb with a first-person nsubj child anchors at most one event: the
    binding covering the most tokens wins, ties go to the lowest pattern
    number, then to the smallest token-index tuple.
    """
    events: list[Event] = []
    for v1 in sentence.tokens:
        if not _is_verb(v1):
            continue
        subjects = [
            c
            for c in sentence.children(v1.index)
            if c.deprel == "nsubj" and c.lemma in FIRST_PERSON_LEMMAS
        ]
        best: tuple[int, int, tuple[int, ...]] | None = None
        best_binding: tuple[str, dict[str, Token]] | None = None
        for subj in subjects:
            for pattern in ACTION_PATTERNS:
                for binding in _bindings(sentence, pattern, v1, subj):
                    indices = tuple(sorted(t.index for t in binding.values()))
                    rank = (-len(indices), pattern.number, indices)
                    if best is None or rank < best:
                        best = rank
                        best_binding = (pattern.pattern_id, binding)
        if best_binding is None:
            continue
        pattern_id, binding = best_binding
        indices = tuple(sorted(t.index for t in binding.values()))
        events.append(
            Event(
                sentence=sentence,
                token_indices=indices,
                pattern_id=pattern_id,
                verb_index=v1.index,
                subject_lemma=binding["subj"].lemma,
                negated=_span_negated(sentence, indices),
            )
        )
    events.sort(key=lambda e: e.verb_index)
    return events


def extract_state_event(sentence: ParsedSentence) -> Event | None:
    """Emit one STATE event for the root clause, if it is verbal or copular.

    The span is the root's subtree (the whole sentence) minus punctuation;
    the verb slot is the root itself or its copula.
    """
    root = sentence.root
    if _is_verb(root):
        verb_index = root.index
    else:
        cops = [c for c in sentence.children(root.index) if c.deprel == "cop"]
        if not cops:
            return None
        verb_index = min(c.index for c in cops)
    indices = tuple(t.index for t in sentence.tokens if t.deprel != "punct")
    subjects = [c for c in sentence.children(root.index) if c.deprel == "nsubj"]
    subject_lemma = min(subjects, key=lambda t: t.index).lemma if subjects else None
    return Event(
        sentence=sentence,
        token_indices=indices,
        pattern_id="STATE",
        verb_index=verb_index,
        subject_lemma=subject_lemma,
        negated=_span_negated(sentence, indices),
    )


def extract_events(sentence: ParsedSentence) -> list[Event]:
    """All events of a sentence: the STATE event first, then action events."""
    events: list[Event] = []
    state = extract_state_event(sentence)
    if state is not None:
        events.append(state)
    events.extend(match_action_patterns(sentence))
    return events


def _span_negated(sentence: ParsedSentence, indices: Iterable[int]) -> bool:
    for i in indices:
        tok = sentence.token(i)
        if tok.lemma == "not" or tok.surface.lower() == "n't":
            return True
    return False


def detect_negation(event: Event) -> bool:
    """True when the event span contains lemma "not" or the clitic "n't"."""
    return _span_negated(event.sentence, event.token_indices)


def classify_tense(event: Event) -> Tense:
    """Past iff the event verb is tagged VBD or VBN."""
    tag = event.sentence.token(event.verb_index).pos_tag
    return Tense.PAST if tag in ("VBD", "VBN") else Tense.OTHER


def detect_perception(event: Event, lexicon: BeliefLexicon) -> list[PerceptionLink]:
    """Apply the four perception keyword combinations to one event.

    1. food entity + feeling word, 2. food entity + emotion adjective,
    3. first-person subject + emotion adjective, 4. emotion verb as the event
    verb. Food words only link when combination 1 or 2 fires. Negation flips
    feeling/emotion nodes to their opposites.
    """
    tokens = event.tokens()
    food_words: list[str] = []
    feeling_words: list[tuple[str, NatureNodeId]] = []
    emo_adj_words: list[tuple[str, NatureNodeId]] = []
    seen_food: set[str] = set()
    seen_feeling: set[tuple[str, NatureNodeId]] = set()
    seen_emo: set[tuple[str, NatureNodeId]] = set()
    for tok in tokens:
        nodes = lexicon.lookup(tok.lemma)
        if NatureNodeId.FOOD in nodes and tok.lemma not in seen_food:
            seen_food.add(tok.lemma)
            food_words.append(tok.lemma)
        for node in sorted(nodes, key=lambda n: n.value):
            if node in _FEELING_NODES and (tok.lemma, node) not in seen_feeling:
                seen_feeling.add((tok.lemma, node))
                feeling_words.append((tok.lemma, node))
            if node in _EMOTION_NODES and tok.pos_tag.startswith("JJ"):
                if (tok.lemma, node) not in seen_emo:
                    seen_emo.add((tok.lemma, node))
                    emo_adj_words.append((tok.lemma, node))

    links: list[PerceptionLink] = []
    emitted: set[tuple[str, NatureNodeId]] = set()

    def emit(word: str, node: NatureNodeId, combo: Combo) -> None:
        if (word, node) in emitted:
            return
        emitted.add((word, node))
        if event.negated and node in _FEELING_NODES | _EMOTION_NODES:
            links.append(PerceptionLink(word, opposite_node(node), combo, flipped=True))
        else:
            links.append(PerceptionLink(word, node, combo))

    if food_words and feeling_words:
        for word in food_words:
            emit(word, NatureNodeId.FOOD, Combo.FOOD_FEELING)
        for word, node in feeling_words:
            emit(word, node, Combo.FOOD_FEELING)
    if food_words and emo_adj_words:
        for word in food_words:
            emit(word, NatureNodeId.FOOD, Combo.FOOD_EMOTION)
        for word, node in emo_adj_words:
            emit(word, node, Combo.FOOD_EMOTION)
    if event.subject_lemma in FIRST_PERSON_LEMMAS and emo_adj_words:
        for word, node in emo_adj_words:
            emit(word, node, Combo.FIRSTPERSON_EMOTION)

    verb = event.sentence.token(event.verb_index)
    for entry in lexicon.tuples_for(verb.lemma):
        if entry.node in _EMOTION_NODES and entry.pos_class is PosClass.VERB:
            emit(verb.lemma, entry.node, Combo.EMOTIONAL_ACTION)

    return links
