"""Suffix-stripping stemmer (Porter, 1980).

Behaviour matches the author's reference implementation, including its two
documented departures from the published 1980 algorithm in step 2
("bli" -> "ble" and the extra "logi" -> "log" rule). The bundled word/stem
fixture in ``data/porter_reference_pairs.tsv`` pins that behaviour.

Input tokens are expected lowercase. Words of length <= 2 and the number
placeholder token ``[n]`` pass through unchanged.
"""

from __future__ import annotations

from functools import lru_cache

NUMBER_TOKEN = "[n]"


def porter_stem(token: str) -> str:
    """Return the stem of a single lowercase token."""
    if token == NUMBER_TOKEN:
        return token
    return _stem(token)


@lru_cache(maxsize=1 << 18)
def _stem(word: str) -> str:
    if len(word) <= 2:
        return word
    b = list(word)
    k = _step_1ab(b, len(b) - 1)
    k = _step_1c(b, k)
    k = _step_2(b, k)
    k = _step_3(b, k)
    k = _step_4(b, k)
    k = _step_5(b, k)
    return "".join(b[: k + 1])


def _is_cons(b: list[str], i: int) -> bool:
    ch = b[i]
    if ch in "aeiou":
        return False
    if ch == "y":
        # y is a consonant at the start, a vowel after a consonant
        return True if i == 0 else not _is_cons(b, i - 1)
    return True


def _measure(b: list[str], j: int) -> int:
    """Count of vowel-consonant sequences in b[0..j]."""
    n = 0
    i = 0
    while True:
        if i > j:
            return n
        if not _is_cons(b, i):
            break
        i += 1
    i += 1
    while True:
        while True:
            if i > j:
                return n
            if _is_cons(b, i):
                break
            i += 1
        i += 1
        n += 1
        while True:
            if i > j:
                return n
            if not _is_cons(b, i):
                break
            i += 1
        i += 1


def _has_vowel(b: list[str], j: int) -> bool:
    return any(not _is_cons(b, i) for i in range(j + 1))


def _double_cons(b: list[str], i: int) -> bool:
    if i < 1 or b[i] != b[i - 1]:
        return False
    return _is_cons(b, i)


def _cvc(b: list[str], i: int) -> bool:
    # consonant-vowel-consonant ending where the last consonant is not w, x, y
    if i < 2 or not _is_cons(b, i) or _is_cons(b, i - 1) or not _is_cons(b, i - 2):
        return False
    return b[i] not in "wxy"


def _ends(b: list[str], k: int, suffix: str) -> int:
    """Offset of the char before `suffix` if b[0..k] ends with it, else -2."""
    n = len(suffix)
    if n > k + 1:
        return -2
    if "".join(b[k - n + 1 : k + 1]) != suffix:
        return -2
    return k - n


def _set_to(b: list[str], j: int, s: str) -> int:
    b[j + 1 : j + 1 + len(s)] = list(s)
    del b[j + 1 + len(s) :]
    return j + len(s)


def _step_1ab(b: list[str], k: int) -> int:
    if b[k] == "s":
        if _ends(b, k, "sses") >= -1:
            k -= 2
        elif (j := _ends(b, k, "ies")) >= -1:
            k = _set_to(b, j, "i")
        elif b[k - 1] != "s":
            k -= 1

    if (j := _ends(b, k, "eed")) >= -1:
        if _measure(b, j) > 0:
            k -= 1
    else:
        j = _ends(b, k, "ed")
        if j < -1:
            j = _ends(b, k, "ing")
        if j >= -1 and _has_vowel(b, j):
            k = j
            if (j2 := _ends(b, k, "at")) >= -1:
                k = _set_to(b, j2, "ate")
            elif (j2 := _ends(b, k, "bl")) >= -1:
                k = _set_to(b, j2, "ble")
            elif (j2 := _ends(b, k, "iz")) >= -1:
                k = _set_to(b, j2, "ize")
            elif _double_cons(b, k):
                if b[k] not in "lsz":
                    k -= 1
            elif _measure(b, k) == 1 and _cvc(b, k):
                k = _set_to(b, k, "e")
    return k


def _step_1c(b: list[str], k: int) -> int:
    if b[k] == "y" and _has_vowel(b, k - 1):
        b[k] = "i"
    return k


# (suffix, replacement) pairs keyed by the second-to-last letter, as in the
# reference implementation's switch; first match wins, applied when m > 0.
_STEP2_RULES = {
    "a": (("ational", "ate"), ("tional", "tion")),
    "c": (("enci", "ence"), ("anci", "ance")),
    "e": (("izer", "ize"),),
    "l": (("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous")),
    "o": (("ization", "ize"), ("ation", "ate"), ("ator", "ate")),
    "s": (("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous")),
    "t": (("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")),
    "g": (("logi", "log"),),
}

_STEP3_RULES = {
    "e": (("icate", "ic"), ("ative", ""), ("alize", "al")),
    "i": (("iciti", "ic"),),
    "l": (("ical", "ic"), ("ful", "")),
    "s": (("ness", ""),),
}


def _apply_rules(b: list[str], k: int, rules: dict, key_index: int) -> int:
    for suffix, repl in rules.get(b[k + key_index], ()):
        j = _ends(b, k, suffix)
        if j >= -1:
            if _measure(b, j) > 0:
                k = _set_to(b, j, repl)
            return k
    return k


def _step_2(b: list[str], k: int) -> int:
    return _apply_rules(b, k, _STEP2_RULES, -1)


def _step_3(b: list[str], k: int) -> int:
    return _apply_rules(b, k, _STEP3_RULES, 0)


_STEP4_SUFFIXES = {
    "a": ("al",),
    "c": ("ance", "ence"),
    "e": ("er",),
    "i": ("ic",),
    "l": ("able", "ible"),
    "n": ("ant", "ement", "ment", "ent"),
    "o": ("ion", "ou"),
    "s": ("ism",),
    "t": ("ate", "iti"),
    "u": ("ous",),
    "v": ("ive",),
    "z": ("ize",),
}


def _step_4(b: list[str], k: int) -> int:
    for suffix in _STEP4_SUFFIXES.get(b[k - 1], ()):
        j = _ends(b, k, suffix)
        if j >= -1:
            if suffix == "ion" and (j < 0 or b[j] not in "st"):
                return k
            if _measure(b, j) > 1:
                k = j
            return k
    return k


def _step_5(b: list[str], k: int) -> int:
    j = k
    if b[k] == "e":
        m = _measure(b, j)
        if m > 1 or (m == 1 and not _cvc(b, k - 1)):
            k -= 1
    if b[k] == "l" and _double_cons(b, k) and _measure(b, j) > 1:
        k -= 1
    return k
