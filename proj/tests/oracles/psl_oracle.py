"""Independent reference implementation of public-suffix matching and URL
domain normalization, implemented directly from the publicsuffix.org
algorithm description. Used only to generate fixture manifests; shares no
code with the library under test."""


def ascii_lower(s: str) -> str:
    return "".join(chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in s)


class Psl:
    def __init__(self, path):
        self.rules = []  # (labels, is_exception)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("//"):
                    continue
                exc = line.startswith("!")
                if exc:
                    line = line[1:]
                self.rules.append((line.split("."), exc))

    @staticmethod
    def _matches(rule_labels, labels):
        if len(rule_labels) > len(labels):
            return False
        return all(
            r == "*" or r == l
            for r, l in zip(reversed(rule_labels), reversed(labels))
        )

    def public_suffix_len(self, labels):
        exc_len = None
        best = 0
        for rule_labels, exc in self.rules:
            if self._matches(rule_labels, labels):
                if exc:
                    cand = len(rule_labels) - 1
                    exc_len = cand if exc_len is None else max(exc_len, cand)
                else:
                    best = max(best, len(rule_labels))
        if exc_len is not None:
            return exc_len
        return best if best > 0 else 1  # implicit "*" rule

    def registrable(self, host: str):
        labels = host.split(".")
        if any(l == "" for l in labels):
            return None
        ps = self.public_suffix_len(labels)
        if ps >= len(labels):
            return None
        return ".".join(labels[len(labels) - ps - 1:])


def puny_label(label: str) -> str:
    if all(ord(c) < 128 for c in label):
        return label
    return "xn--" + label.encode("punycode").decode("ascii")


def host_of(url: str):
    s = url
    if "://" in s:
        s = s.split("://", 1)[1]
    for c in "/?#":
        p = s.find(c)
        if p >= 0:
            s = s[:p]
    if "@" in s:
        s = s.rsplit("@", 1)[1]
    if s.startswith("["):
        p = s.find("]")
        if p < 0:
            return None
        return ascii_lower(s[: p + 1])
    if ":" in s:
        s = s.split(":", 1)[0]
    s = ascii_lower(s).rstrip(".")
    return s or None


def normalize(url: str, psl: Psl, exceptions, naive=False):
    h = host_of(url)
    if h is None:
        return None
    if h.startswith("["):
        return h
    labels = h.split(".")
    if any(l == "" for l in labels):
        return None
    try:
        labels = [puny_label(l) for l in labels]
    except UnicodeError:
        return None
    h = ".".join(labels)
    if all(all(c in "0123456789" for c in l) for l in labels):
        return h  # IPv4 literal, no registrable domain concept
    if h in exceptions:
        return h
    if naive:
        return ".".join(labels[-2:]) if len(labels) >= 2 else None
    return psl.registrable(h)
