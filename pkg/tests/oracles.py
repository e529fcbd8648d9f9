"""Independent reference implementations used to check the library.

These deliberately avoid the library's keyed dictionaries and trie: they
work on plain lists with nested loops and string comparison, following the
nested-loop file comparison procedure literally.
"""

import hashlib


def fold(path_text, case_sensitive=False):
    return path_text if case_sensitive else path_text.casefold()


def _classify_pair(a, b):
    """State for a same-path, same-kind pair, or None when all properties match."""
    if a.kind.value == "file":
        sizes_differ = a.size != b.size
        hashes_differ = a.sha1 is not None and b.sha1 is not None and a.sha1 != b.sha1
        if sizes_differ or hashes_differ:
            return "modified"
        if a.write_time != b.write_time or a.attributes != b.attributes:
            return "changed"
        return None
    if a.write_time != b.write_time or a.attributes != b.attributes:
        return "changed"
    return None


def brute_force_files(files1, files2, case_sensitive=False):
    out = []
    matched = [False] * len(files2)
    for a in files1:
        found = False
        for j, b in enumerate(files2):
            if matched[j]:
                continue
            if a.kind != b.kind or fold(a.path.render(), case_sensitive) != fold(b.path.render(), case_sensitive):
                continue
            matched[j] = True
            found = True
            state = _classify_pair(a, b)
            if state:
                out.append(("file", state, b))
            break
        if not found:
            out.append(("file", "deleted", a))
    for j, b in enumerate(files2):
        if not matched[j]:
            out.append(("file", "new", b))
    return out


def _parent_text(value):
    return "/".join(value.cellpath.segments[:-1])


def brute_force_registry(keys1, values1, keys2, values2, case_sensitive=False):
    out = []
    matched = [False] * len(keys2)

    def under(values, key):
        k = fold(key.cellpath.render(), case_sensitive)
        return [v for v in values if fold(_parent_text(v), case_sensitive) == k]

    for a in keys1:
        found = False
        for j, b in enumerate(keys2):
            if matched[j] or fold(a.cellpath.render(), case_sensitive) != fold(b.cellpath.render(), case_sensitive):
                continue
            matched[j] = found = True
            if a.modified_time != b.modified_time:
                out.append(("key", "changed", b))
            va_list, vb_list = under(values1, a), under(values2, b)
            vmatched = [False] * len(vb_list)
            for va in va_list:
                vfound = False
                for i, vb in enumerate(vb_list):
                    if vmatched[i] or fold(va.cellpath.render(), case_sensitive) != fold(vb.cellpath.render(), case_sensitive):
                        continue
                    vmatched[i] = vfound = True
                    if va.data_type != vb.data_type or va.data != vb.data:
                        out.append(("value", "modified", vb))
                    break
                if not vfound:
                    out.append(("value", "deleted", va))
            for i, vb in enumerate(vb_list):
                if not vmatched[i]:
                    out.append(("value", "new", vb))
            break
        if not found:
            out.append(("key", "deleted", a))
            out.extend(("value", "deleted", v) for v in under(values1, a))
    for j, b in enumerate(keys2):
        if not matched[j]:
            out.append(("key", "new", b))
            out.extend(("value", "new", v) for v in under(values2, b))
    return out


def brute_force_diff(s1, s2):
    cs = s1.case_sensitive
    out = brute_force_files(list(s1.files.values()), list(s2.files.values()), cs)
    out += brute_force_registry(list(s1.keys.values()), list(s1.values.values()),
                                list(s2.keys.values()), list(s2.values.values()), cs)
    return out


def _record_path(rec):
    return getattr(rec, "path", None) or rec.cellpath


def canonical(entries, case_sensitive=False):
    """Sort (category, state, record) triples into a comparable order."""
    return sorted(entries, key=lambda t: (t[0], fold(_record_path(t[2]).render(), case_sensitive),
                                          getattr(t[2], "kind", ""), t[1]))


def library_triples(result):
    out = [("file", s.value, e) for e, s in result.file_deltas]
    out += [("key", s.value, k) for k, s in result.key_deltas]
    out += [("value", s.value, v) for v, s in result.value_deltas]
    return out


def reference_sha1(data: bytes) -> str:
    return hashlib.sha1(data).hexdigest()


def linear_contains(paths, query, case_sensitive=False):
    q = fold(query, case_sensitive)
    for p in paths:
        if fold(p, case_sensitive) == q:
            return True
    return False
