"""The rule DSL: text form of proximity rules, one rule per line.

Grammar (clauses in this order, ``#`` starts a comment in rule files):

    IF visible(<MAC>)
       [AND rssi >= <int>]
       [AND stat(<visit_count|unique_devices>, <window_s>) <op> <int>]
    THEN show(<id>[, <id>]*)
       [PRIORITY <int>] [DISABLED]

with ``<op>`` one of ``<  <=  >  >=``. Canonical text uses single spaces,
uppercase keywords, and uppercase MACs; ``format_rule(parse_rule(text))``
reproduces canonical text exactly. Omitted clauses default to priority 0,
enabled, no predicates.
"""

import hashlib
import re

from .errors import InvalidMac, InvalidThreshold, RuleSyntaxError
from .macaddr import canonical_mac
from .presence import StatMetric
from .rules import Cmp, ProximityRule, StatPredicate

_MAC_TOKEN = re.compile(r"[0-9A-Za-z:\-]+")
_INT_TOKEN = re.compile(r"-?\d+")
_ID_TOKEN = re.compile(r"[A-Za-z0-9_.\-]+")
_METRIC_TOKEN = re.compile(r"[a-z_]+")
_OP_TOKEN = re.compile(r"<=|>=|<|>")


class _Cursor:
    """Single-line scanner tracking a 1-based column for diagnostics."""

    def __init__(self, text: str, line: int):
        self.text = text
        self.line = line
        self.pos = 0

    @property
    def column(self) -> int:
        return self.pos + 1

    def skip_spaces(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek_word(self) -> str:
        match = re.compile(r"\S+").match(self.text, self.pos)
        return match.group(0) if match else ""

    def take_literal(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect_literal(self, literal: str, what: str | None = None) -> None:
        if not self.take_literal(literal):
            self.fail(f"expected {what or literal!r}")

    def take_re(self, pattern: re.Pattern) -> str | None:
        match = pattern.match(self.text, self.pos)
        if match is None:
            return None
        self.pos = match.end()
        return match.group(0)

    def expect_re(self, pattern: re.Pattern, what: str) -> str:
        token = self.take_re(pattern)
        if token is None:
            self.fail(f"expected {what}")
        return token

    def fail(self, message: str):
        raise RuleSyntaxError(message, line=self.line, column=self.column)


def parse_rule(text: str, line: int = 1, rule_id: str | None = None) -> ProximityRule:
    """Parse one rule line.

    ``rule_id`` defaults to a digest of the canonical text, so the same
    rule text always maps to the same id and re-saving is idempotent.
    """
    cur = _Cursor(text.rstrip("\n"), line)
    cur.skip_spaces()
    cur.expect_literal("IF", "IF")
    cur.skip_spaces()
    cur.expect_literal("visible(", "visible(")
    cur.skip_spaces()
    mac_col = cur.column
    mac_token = cur.take_re(_MAC_TOKEN)
    if mac_token is None:
        cur.fail("expected MAC address")
    try:
        trigger_mac = canonical_mac(mac_token)
    except InvalidMac:
        raise InvalidMac(
            f"bad MAC {mac_token!r} (line {line}, column {mac_col})"
        ) from None
    cur.skip_spaces()
    cur.expect_literal(")", "')'")

    min_rssi: int | None = None
    stat: StatPredicate | None = None
    cur.skip_spaces()
    while cur.take_literal("AND"):
        cur.skip_spaces()
        if cur.take_literal("rssi"):
            if min_rssi is not None or stat is not None:
                cur.fail("rssi clause must appear once, before any stat clause")
            cur.skip_spaces()
            cur.expect_literal(">=", "'>='")
            cur.skip_spaces()
            min_rssi = int(cur.expect_re(_INT_TOKEN, "an integer rssi threshold"))
        elif cur.take_literal("stat("):
            if stat is not None:
                cur.fail("stat clause must appear at most once")
            cur.skip_spaces()
            metric_col = cur.column
            metric_token = cur.expect_re(_METRIC_TOKEN, "a metric name")
            try:
                metric = StatMetric(metric_token)
            except ValueError:
                raise RuleSyntaxError(
                    f"unknown metric {metric_token!r}", line=line, column=metric_col
                ) from None
            cur.skip_spaces()
            cur.expect_literal(",", "','")
            cur.skip_spaces()
            window_col = cur.column
            window_s = int(cur.expect_re(_INT_TOKEN, "a window in seconds"))
            cur.skip_spaces()
            cur.expect_literal(")", "')'")
            cur.skip_spaces()
            op = Cmp(cur.expect_re(_OP_TOKEN, "a comparison operator"))
            cur.skip_spaces()
            threshold_col = cur.column
            threshold = int(cur.expect_re(_INT_TOKEN, "an integer threshold"))
            if window_s <= 0:
                raise InvalidThreshold(
                    f"stat window must be positive, got {window_s} "
                    f"(line {line}, column {window_col})"
                )
            if threshold < 0:
                raise InvalidThreshold(
                    f"stat threshold must be >= 0, got {threshold} "
                    f"(line {line}, column {threshold_col})"
                )
            stat = StatPredicate(metric=metric, window_s=window_s, cmp=op, threshold=threshold)
        else:
            cur.fail("expected 'rssi' or 'stat(' after AND")
        cur.skip_spaces()

    cur.expect_literal("THEN", "THEN")
    cur.skip_spaces()
    cur.expect_literal("show(", "show(")
    cur.skip_spaces()
    content_ids = [cur.expect_re(_ID_TOKEN, "a content id")]
    cur.skip_spaces()
    while cur.take_literal(","):
        cur.skip_spaces()
        content_ids.append(cur.expect_re(_ID_TOKEN, "a content id"))
        cur.skip_spaces()
    cur.expect_literal(")", "')'")

    priority = 0
    enabled = True
    cur.skip_spaces()
    if cur.take_literal("PRIORITY"):
        cur.skip_spaces()
        priority = int(cur.expect_re(_INT_TOKEN, "an integer priority"))
        cur.skip_spaces()
    if cur.take_literal("DISABLED"):
        enabled = False
        cur.skip_spaces()
    if not cur.at_end():
        cur.fail(f"unexpected trailing input {cur.peek_word()!r}")

    rule = ProximityRule(
        rule_id=rule_id or "",
        trigger_mac=trigger_mac,
        content_ids=tuple(content_ids),
        min_rssi_dbm=min_rssi,
        stat=stat,
        priority=priority,
        enabled=enabled,
    )
    if rule_id is None:
        digest = hashlib.sha1(format_rule(rule).encode()).hexdigest()[:12]
        rule = ProximityRule(
            rule_id=f"r-{digest}",
            trigger_mac=rule.trigger_mac,
            content_ids=rule.content_ids,
            min_rssi_dbm=rule.min_rssi_dbm,
            stat=rule.stat,
            priority=rule.priority,
            enabled=rule.enabled,
        )
    return rule


def format_rule(rule: ProximityRule) -> str:
    """Canonical DSL text for a rule (PRIORITY 0 and enabled are implicit)."""
    parts = [f"IF visible({rule.trigger_mac})"]
    if rule.min_rssi_dbm is not None:
        parts.append(f"AND rssi >= {rule.min_rssi_dbm}")
    if rule.stat is not None:
        parts.append(
            f"AND stat({rule.stat.metric.value}, {rule.stat.window_s}) "
            f"{rule.stat.cmp.value} {rule.stat.threshold}"
        )
    parts.append(f"THEN show({', '.join(rule.content_ids)})")
    if rule.priority != 0:
        parts.append(f"PRIORITY {rule.priority}")
    if not rule.enabled:
        parts.append("DISABLED")
    return " ".join(parts)


def iter_rule_lines(text: str):
    """Yield (line_number, rule_text) for non-blank, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_rules_text(text: str) -> list[tuple[int, ProximityRule]]:
    """Parse a whole rule file, failing on the first bad line."""
    return [(lineno, parse_rule(line, line=lineno)) for lineno, line in iter_rule_lines(text)]
