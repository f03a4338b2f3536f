"""Question answering over the store: three retrieval tools and a router.

The tools are semantic search over embeddings, graph expansion from semantic
seeds, and structured querying through generated graph queries. A router
picks one or more tools per question; their results become the context for
the final answer. Every provider-facing step has a deterministic offline
path: a heuristic router, a scripted query generator, and a template
answerer, so the whole pipeline runs hermetically in stub mode.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import NamedTuple

from . import providers
from .embeddings import tokenize
from .expansion import EmptyGraph, EmptySeedSet, expand, personalized_pagerank
from .gql import QueryError, ResultTable, evaluate, parse_query
from .models import GroundMemError
from .store import MemoryStore

DEFAULT_TOP_K = 8
CONTEXT_NOTE_BUDGET = 12
CONTEXT_CHAR_BUDGET = 4000
RERANK_DROP_THRESHOLD = 0.05
RERANK_SWAP_MARGIN = 0.2
TABLE_ROW_CAP = 20

NO_CONTEXT_TEXT = "I found nothing in memory relevant to this question."


class AgentError(GroundMemError):
    pass


class UnparseableQuery(AgentError):
    """Query generation failed twice and no fallback template matched."""


class ToolName(enum.Enum):
    SEMANTIC_SEARCH = "SemanticSearch"
    GRAPH_EXPANSION = "GraphExpansion"
    STRUCTURED_QUERY = "StructuredQuery"


class ContextNote(NamedTuple):
    note_id: str
    text: str
    score: float


@dataclass
class ToolResult:
    tool: ToolName
    context_notes: list[ContextNote] = field(default_factory=list)
    table: ResultTable | None = None
    generated_query: str | None = None
    error: str | None = None

    def as_dict(self) -> dict[str, object]:
        detail: dict[str, object] = {
            "context_notes": [
                {"note_id": n.note_id, "text": n.text, "score": n.score}
                for n in self.context_notes
            ]
        }
        if self.table is not None:
            detail["table"] = self.table.as_dict()
        if self.generated_query is not None:
            detail["generated_query"] = self.generated_query
        if self.error is not None:
            detail["error"] = self.error
        return {"tool": self.tool.value, "detail": detail}


@dataclass
class Answer:
    text: str
    sources: list[str]
    trace: list[ToolResult]


def tool_descriptions() -> list[dict[str, object]]:
    """The published tool catalog, used verbatim in routing prompts."""
    raw = resources.files("groundmem.data").joinpath("tool_descriptions.json").read_text("utf-8")
    return json.loads(raw)


def token_overlap(question: str, text: str) -> float:
    """Jaccard overlap between the token sets of question and text."""
    q_tokens = set(tokenize(question))
    t_tokens = set(tokenize(text))
    union = q_tokens | t_tokens
    if not union:
        return 0.0
    return len(q_tokens & t_tokens) / len(union)


def rerank(question: str, hits: list[ContextNote]) -> list[ContextNote]:
    """Filter and gently reorder hits by token overlap with the question.

    Hits with overlap below RERANK_DROP_THRESHOLD are dropped. The semantic
    order is preserved except where the overlap of a later hit beats an
    earlier neighbor by more than RERANK_SWAP_MARGIN; such pairs swap until
    the list is stable.
    """
    scored = [(hit, token_overlap(question, hit.text)) for hit in hits]
    scored = [(hit, overlap) for hit, overlap in scored if overlap >= RERANK_DROP_THRESHOLD]
    changed = True
    while changed:
        changed = False
        for i in range(len(scored) - 1):
            if scored[i + 1][1] - scored[i][1] > RERANK_SWAP_MARGIN:
                scored[i], scored[i + 1] = scored[i + 1], scored[i]
                changed = True
    return [hit for hit, _ in scored]


# Question shapes with a guaranteed structured-query translation.
_FALLBACK_PATTERNS: tuple[tuple[re.Pattern[str], str], ...] = (
    (re.compile(r"how many images", re.IGNORECASE), "MATCH (n:Image) RETURN count(n)"),
    (
        re.compile(r"how many (?:people|persons)", re.IGNORECASE),
        "MATCH (n:Agent) RETURN count(DISTINCT n)",
    ),
    (
        re.compile(r"how many objects", re.IGNORECASE),
        "MATCH (n:Object) RETURN count(DISTINCT n)",
    ),
    (
        re.compile(r"how many actions", re.IGNORECASE),
        "MATCH (n:Action) RETURN count(DISTINCT n)",
    ),
)

# The scripted stub emits the same translations through the provider
# interface, so stub mode exercises the generate-parse-evaluate path.
DEFAULT_QUERY_RULES: tuple[providers.StubRule, ...] = tuple(
    providers.StubRule(match=f"re:{pattern.pattern}", response=query)
    for pattern, query in _FALLBACK_PATTERNS
)

_ABOUT_LABEL_RE = re.compile(r"\babout\s+[a-z][a-z0-9]*(?:_[a-z0-9]+)*_[0-9]+\b")


def heuristic_route(question: str) -> list[ToolName]:
    """Deterministic router used in stub mode and as the live fallback."""
    lowered = question.lower()
    if "how many" in lowered or "count" in lowered or "number of" in lowered:
        return [ToolName.STRUCTURED_QUERY]
    if (
        "prefer" in lowered
        or "usually" in lowered
        or "background" in lowered
        or _ABOUT_LABEL_RE.search(lowered)
    ):
        return [ToolName.GRAPH_EXPANSION]
    return [ToolName.SEMANTIC_SEARCH]


class StubAnswerer:
    """Deterministic answer synthesis from the assembled context prompt.

    Tables answer as ``count=N`` (the single cell of a one-cell table, the
    row count otherwise); note context answers with the first note's text;
    no context answers with the no-context sentence.
    """

    def chat(self, request: providers.ChatRequest) -> providers.ChatResponse:
        prompt = request.last_user_content()
        content = NO_CONTEXT_TEXT
        rows = re.findall(r"^row: (.*)$", prompt, re.MULTILINE)
        first_note = re.search(r"^note [^:]+: (.*)$", prompt, re.MULTILINE)
        if rows:
            values = rows[0].split(", ")
            content = f"count={rows[0]}" if len(values) == 1 else f"count={len(rows)}"
        elif first_note:
            content = first_note.group(1)
        return providers.ChatResponse(content=content, finish_reason="stop")


def build_answer_prompt(
    question: str,
    table: ResultTable | None,
    generated_query: str | None,
    notes: list[ContextNote],
) -> str:
    lines = [
        "Answer the question using only the context below.",
        "",
        f"Question: {question}",
    ]
    if table is not None:
        lines.append("")
        lines.append("[table result]")
        if generated_query:
            lines.append(f"query: {generated_query}")
        lines.append(f"columns: {', '.join(table.columns)}")
        for row in table.rows[:TABLE_ROW_CAP]:
            rendered = ", ".join("null" if v is None else str(v) for v in row)
            lines.append(f"row: {rendered}")
    if notes:
        lines.append("")
        lines.append("[notes]")
        for note in notes:
            lines.append(f"note {note.note_id}: {note.text}")
    return "\n".join(lines)


class RetrievalAgent:
    """Routes questions to tools and synthesizes sourced answers."""

    def __init__(
        self,
        store: MemoryStore,
        settings: providers.ProviderSettings | None = None,
        chat_client: providers.ChatClient | None = None,
        query_client: providers.ChatClient | None = None,
        top_k: int = DEFAULT_TOP_K,
    ) -> None:
        self.store = store
        self.settings = settings or providers.ProviderSettings.from_env()
        self.top_k = top_k
        if self.settings.mode == "live":
            live = chat_client or providers.LiveChatClient(self.settings)
            self._answer_chat: providers.ChatClient = live
            self._query_chat: providers.ChatClient = query_client or live
            self._live = True
        else:
            self._answer_chat = chat_client or StubAnswerer()
            self._query_chat = query_client or providers.ScriptedStub(
                rules=DEFAULT_QUERY_RULES, fallthrough=""
            )
            self._live = False

    # ------------------------------------------------------------------
    # Tools
    # ------------------------------------------------------------------

    def _note_text(self, note_id: str) -> str:
        return self.store.graph.get_note(note_id).plain_caption

    def tool_semantic_search(self, question: str, k: int | None = None) -> ToolResult:
        k = k or self.top_k
        hits = self.store.semantic_search(question, k)
        context = [
            ContextNote(hit.note_id, self._note_text(hit.note_id), float(hit.score))
            for hit in hits
        ]
        return ToolResult(
            tool=ToolName.SEMANTIC_SEARCH, context_notes=rerank(question, context)
        )

    def tool_graph_expansion(self, question: str, k: int | None = None) -> ToolResult:
        k = k or self.top_k
        hits = self.store.semantic_search(question, k)
        if not hits:
            return ToolResult(tool=ToolName.GRAPH_EXPANSION)
        seed_scores = {hit.note_id: float(hit.score) for hit in hits}
        seed_ids = [hit.note_id for hit in hits]
        try:
            expanded = expand(self.store.graph, seed_ids, self.store.expansion_params)
            rank = personalized_pagerank(self.store.graph, seed_ids, self.store.expansion_params)
        except (EmptySeedSet, EmptyGraph):
            expanded, rank = [], {}
        context: list[ContextNote] = []
        for note_id in expanded:
            score = seed_scores.get(note_id, rank.get(note_id, 0.0))
            context.append(ContextNote(note_id, self._note_text(note_id), float(score)))
        return ToolResult(tool=ToolName.GRAPH_EXPANSION, context_notes=context)

    def _generate_query(self, question: str, previous: str | None = None, error: str | None = None) -> str:
        content = f"Translate this question into a graph query.\n\nQuestion: {question}"
        if previous is not None and error is not None:
            content += (
                f"\n\nYour previous query was rejected.\nQuery: {previous}\nError: {error}\n"
                "Return a corrected query only."
            )
        request = providers.ChatRequest(
            messages=(
                providers.ChatMessage(
                    role="system",
                    content=(
                        "You translate questions about a memory graph into a read-only "
                        "query language. Node labels: Image, MemoryNote, Agent, Object, "
                        "Action. Relationships: HAS_PREVIOUS, HAS_ELEMENT. Respond with "
                        "the query text only."
                    ),
                ),
                providers.ChatMessage(role="user", content=content),
            ),
            model=self.settings.chat_model,
            temperature=0.0,
        )
        return self._query_chat.chat(request).content.strip()

    def _fallback_query(self, question: str) -> str:
        for pattern, query in _FALLBACK_PATTERNS:
            if pattern.search(question):
                return query
        raise UnparseableQuery(
            "could not generate a parseable query and no fallback template matched"
        )

    def tool_structured(self, question: str) -> ToolResult:
        query_text = self._generate_query(question)
        ast = None
        for attempt in range(2):
            try:
                ast = parse_query(query_text)
                break
            except QueryError as exc:
                if attempt == 0:
                    query_text = self._generate_query(question, previous=query_text, error=str(exc))
        if ast is None:
            query_text = self._fallback_query(question)
            ast = parse_query(query_text)
        table = evaluate(ast, self.store.graph)
        return ToolResult(
            tool=ToolName.STRUCTURED_QUERY, table=table, generated_query=query_text
        )

    # ------------------------------------------------------------------
    # Routing and answering
    # ------------------------------------------------------------------

    def route(self, question: str) -> list[ToolName]:
        """Pick ≥ 1 tool for the question; total even under provider failure."""
        if self._live:
            try:
                catalog = json.dumps(tool_descriptions(), indent=2)
                request = providers.ChatRequest(
                    messages=(
                        providers.ChatMessage(
                            role="system",
                            content=(
                                "Select the best retrieval tools for the question from "
                                f"this catalog:\n{catalog}\n"
                                "Respond with one or more tool names, comma-separated."
                            ),
                        ),
                        providers.ChatMessage(role="user", content=question),
                    ),
                    model=self.settings.chat_model,
                    temperature=0.0,
                )
                names = [n.strip() for n in self._answer_chat.chat(request).content.split(",")]
                chosen = [ToolName(name) for name in names if name]
                if chosen:
                    return chosen
            except (providers.ProviderError, ValueError):
                pass
        return heuristic_route(question)

    def _run_tool(self, tool: ToolName, question: str) -> ToolResult:
        try:
            if tool is ToolName.SEMANTIC_SEARCH:
                return self.tool_semantic_search(question)
            if tool is ToolName.GRAPH_EXPANSION:
                return self.tool_graph_expansion(question)
            return self.tool_structured(question)
        except (providers.ProviderError, AgentError, QueryError) as exc:
            return ToolResult(tool=tool, error=str(exc))

    def answer_question(self, question: str) -> Answer:
        """Route, run tools, and synthesize an answer from their context.

        Deterministic end to end in stub mode. Read-only: no call path from
        here mutates the graph or the index.
        """
        if not question.strip():
            raise ValueError("question must be non-empty")
        trace = [self._run_tool(tool, question) for tool in self.route(question)]

        best_score: dict[str, float] = {}
        texts: dict[str, str] = {}
        for result in trace:
            for note in result.context_notes:
                texts[note.note_id] = note.text
                if note.note_id not in best_score or note.score > best_score[note.note_id]:
                    best_score[note.note_id] = note.score
        ranked = sorted(best_score.items(), key=lambda kv: (-kv[1], kv[0]))
        notes: list[ContextNote] = []
        used_chars = 0
        for note_id, score in ranked:
            text = texts[note_id]
            if len(notes) >= CONTEXT_NOTE_BUDGET or used_chars + len(text) > CONTEXT_CHAR_BUDGET:
                break
            notes.append(ContextNote(note_id, text, score))
            used_chars += len(text)

        table = None
        generated_query = None
        table_sources: list[str] = []
        for result in trace:
            if result.table is not None:
                table = result.table
                generated_query = result.generated_query
                table_sources = list(result.table.source_note_ids)
                break

        if table is None and not notes:
            return Answer(text=NO_CONTEXT_TEXT, sources=[], trace=trace)

        prompt = build_answer_prompt(question, table, generated_query, notes)
        request = providers.ChatRequest(
            messages=(
                providers.ChatMessage(
                    role="system",
                    content="Answer from the provided context only. Be concise.",
                ),
                providers.ChatMessage(role="user", content=prompt),
            ),
            model=self.settings.chat_model,
            temperature=0.0,
        )
        response = self._answer_chat.chat(request)

        sources: list[str] = []
        for note_id in table_sources + [note.note_id for note in notes]:
            if note_id not in sources and self.store.graph.has_note(note_id):
                sources.append(note_id)
        return Answer(text=response.content, sources=sources, trace=trace)
