"""Motivation-emotion-action graph extraction from natural-language reviews."""

from .belief import (
    BeliefLexicon,
    BeliefSource,
    BeliefTuple,
    EmotionBaseWord,
    EmotionClass,
    PosClass,
    SenseRecord,
    compile_emotion_lexicon,
    compile_feeling_lexicon,
    compile_food_lexicon,
    dump_lexicon,
    load_lexicon,
)
from .dag import (
    ActionClass,
    DagLink,
    EventNode,
    Justification,
    MeaDag,
    build_mea_dag,
    forward_transmit,
    from_json,
    is_valid,
    link_actions,
    link_perceptions,
    to_dot,
    to_json,
)
from .extraction import (
    Combo,
    Event,
    ParsedSentence,
    PerceptionLink,
    Tense,
    Token,
    classify_tense,
    detect_negation,
    detect_perception,
    extract_events,
    match_action_patterns,
    parse_conllu,
)
from .llm import ClientConfig, ClientMode, LlmClient, PromptTemplate, heuristic_classifier
from .nature import (
    NatureEdge,
    NatureGraph,
    NatureNodeId,
    default_graph,
    load_graph_file,
    opposite_node,
    transmitting_tails,
    validate_graph,
)

__version__ = "0.1.0"
