"""JSON documents whose semantic errors point at a line and column."""

import json
from json.decoder import scanstring


class DocumentError(ValueError):
    def __init__(self, message, source="<input>", line=None, column=None):
        self.message = message
        self.source = source
        self.line = line
        self.column = column
        where = source if line is None else "%s:%d:%d" % (source, line, column)
        super().__init__("%s: %s" % (where, message))


def _skip_ws(text, i):
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def value_positions(text):
    """Map JSON paths (tuples of keys and indices) to character offsets of their values."""
    dec = json.JSONDecoder()
    out = {}

    def walk(i, path):
        i = _skip_ws(text, i)
        out[path] = i
        if text[i] == "{":
            i = _skip_ws(text, i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = scanstring(text, _skip_ws(text, i) + 1)
                i = walk(_skip_ws(text, i) + 1, path + (key,))  # past ':'
                i = _skip_ws(text, i)
                if text[i] == "}":
                    return i + 1
                i += 1  # ','
        if text[i] == "[":
            i = _skip_ws(text, i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = _skip_ws(text, walk(i, path + (k,)))
                k += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        return dec.raw_decode(text, i)[1]

    walk(0, ())
    return out


def line_col(text, offset):
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


class Locator:
    """Raises errors anchored at the closest recorded JSON path."""

    def __init__(self, text, source, error_cls):
        self.text = text
        self.source = source
        self.error_cls = error_cls
        self.positions = value_positions(text)

    def where(self, path):
        p = tuple(path)
        while p not in self.positions and p:
            p = p[:-1]
        return line_col(self.text, self.positions.get(p, 0))

    def fail(self, path, message):
        line, col = self.where(path)
        raise self.error_cls(message, self.source, line, col)


def parse_document(text, source, error_cls=DocumentError):
    """``(data, locator)``; syntax errors carry the decoder's own position."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise error_cls(e.msg, source, e.lineno, e.colno) from None
    return doc, Locator(text, source, error_cls)
