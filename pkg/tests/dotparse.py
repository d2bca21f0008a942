"""A deliberately small DOT reader, enough to check what the package emits."""
import re

_TOKEN = re.compile(r'\s*(?:(->)|("(?:[^"\\]|\\.)*")|([A-Za-z_][A-Za-z0-9_]*|-?\d+(?:\.\d+)?)|([{}\[\];=,]))')


class DotError(ValueError):
    pass


def tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DotError(f"bad character at {pos}: {text[pos:pos + 10]!r}")
        out.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    return out


def parse(text):
    """Return (name, nodes: dict id -> attrs, edges: list of (a, b, attrs))."""
    toks = tokenize(text)
    if len(toks) < 4 or toks[0] != "digraph" or toks[2] != "{" or toks[-1] != "}":
        raise DotError("expected 'digraph NAME { ... }'")
    name = toks[1]
    body = toks[3:-1]
    nodes, edges = {}, []
    i = 0

    def attrs(i):
        out = {}
        if i < len(body) and body[i] == "[":
            i += 1
            while body[i] != "]":
                key = body[i]
                if body[i + 1] != "=":
                    raise DotError(f"expected '=' after {key}")
                out[key] = body[i + 2]
                i += 3
                if body[i] == ",":
                    i += 1
            i += 1
        return out, i

    while i < len(body):
        head = body[i]
        if head in ("node", "edge", "graph"):
            _, i = attrs(i + 1)
        elif i + 1 < len(body) and body[i + 1] == "=":
            i += 3
        elif i + 1 < len(body) and body[i + 1] == "->":
            a, b = head, body[i + 2]
            a_attrs, i = attrs(i + 3)
            edges.append((a, b, a_attrs))
        else:
            node_attrs, i = attrs(i + 1)
            if head in nodes:
                raise DotError(f"node {head} declared twice")
            nodes[head] = node_attrs
        if i >= len(body) or body[i] != ";":
            raise DotError(f"missing ';' near token {i}")
        i += 1
    for a, b, _ in edges:
        if a not in nodes or b not in nodes:
            raise DotError(f"edge {a} -> {b} uses an undeclared node")
    return name, nodes, edges


def is_tree(nodes, edges):
    parents = {}
    for a, b, _ in edges:
        if b in parents:
            return False
        parents[b] = a
    roots = [n for n in nodes if n not in parents]
    return len(roots) == 1 and len(edges) == len(nodes) - 1
