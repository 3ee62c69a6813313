"""Serialization helpers: 17-significant-digit floats, JSON and CSV writers."""

import numpy as np


def fnum(x):
    """Format one float with 17 significant digits (lossless round trip)."""
    return "%.17g" % float(x)


def _json_value(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x:
            out.append('"nan"')
        elif x == float("inf"):
            out.append('"inf"')
        elif x == float("-inf"):
            out.append('"-inf"')
        else:
            out.append(fnum(x))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            _json_value(str(k), out)
            out.append(": ")
            _json_value(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(list(obj)):
            if i:
                out.append(", ")
            _json_value(v, out)
        out.append("]")
    else:
        raise TypeError("cannot serialize %r" % type(obj))


def dump_json(obj):
    """Serialize nested dicts/lists/scalars to a JSON string.

    Hand-rolled so that floats are written with %.17g (the stdlib encoder
    offers no control over float formatting).  Non-finite floats become the
    strings "nan"/"inf"/"-inf".
    """
    out = []
    _json_value(obj, out)
    out.append("\n")
    return "".join(out)


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(dump_json(obj))


def write_csv(path, header, rows):
    """Write rows (sequences of str/int/float) as CSV with LF endings.

    Floats go through fnum(); everything else through str().
    """
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, (float, np.floating)):
                    cells.append(fnum(v))
                elif isinstance(v, (bool, np.bool_)):
                    cells.append("1" if v else "0")
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")
