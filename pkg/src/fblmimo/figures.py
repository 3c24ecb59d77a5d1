"""Figure presets (flag sets per run) and gnuplot script generation.

Presets are plain data: each one lists the command lines whose tables are
stacked into the figure's CSV, plus the axes and series of its plot.
"""

from __future__ import annotations

from .table import CsvTable

_FIG2_RUN = ("bounds --tx {L} --rx {L} --snr-db {db} --epsilon 1e-7 --scheme st "
             "--sweep n:150:20000:40:log --rate-normalization capacity")
_FIG2_SERIES = [
    ("normal_approx", "Normal approximation"),
    ("converse_finite", "Converse bound"),
    ("achievability_finite", "Achievability bound"),
    ("achievability_asymptotic", "Achievability (asymptotic)"),
]


def _fig2(L, db):
    return {
        "runs": [_FIG2_RUN.format(L=L, db=db)],
        "plot": {
            "title": f"ST bounds, L=N={L}, rho={db} dB, eps=1e-7",
            "x": "n", "xlabel": "Blocklength n", "ylabel": "Normalized rate R/C",
            "logx": True, "logy": False,
            "series": _FIG2_SERIES,
        },
    }


FIGURES = {
    "2a": _fig2(4, 0),
    "2b": _fig2(4, 10),
    "2c": _fig2(16, 10),
    "5": {
        "runs": [f"ergodic --ratio {c} --snr-db 10 --sweep rx:1:8:8 --blocklength 100 --epsilon 1e-7 --trials 4000"
                 for c in (1, 2, 4)],
        "plot": {
            "title": "Expected channel dispersion, rho=10 dB",
            "x": "rx", "xlabel": "Receive antennas N", "ylabel": "E[V] (bits^2)",
            "logx": False, "logy": False,
            "group": "ratio", "group_label": "c",
            "series": [
                ("e_dispersion_st", "ST sim"),
                ("hs_dispersion_st", "ST approx"),
                ("e_dispersion_td", "TD sim"),
                ("hs_dispersion_td", "TD approx"),
            ],
        },
    },
    "6": {
        "runs": [f"ergodic --ratio 16 --rx {N} --blocklength 100 --epsilon 1e-7 --sweep snr_db:0:30:7 --trials 4000"
                 for N in (1, 2, 4)],
        "plot": {
            "title": "Average maximal rate per link, c=16, n=100, eps=1e-7",
            "x": "snr_db", "xlabel": "SNR (dB)", "ylabel": "Rate per link (bits/use)",
            "logx": False, "logy": False,
            "group": "rx", "group_label": "N",
            "series": [
                ("rate_st_mc", "ST sim"),
                ("rate_st_hs", "ST approx"),
                ("rate_td_mc", "TD sim"),
                ("rate_td_hs", "TD approx"),
            ],
        },
    },
    "7": {
        "runs": [f"compare --tx {m} --rx {m} --snr-db 10 --epsilon 1e-7 --per-link-rate 2 --sweep n:10:1000:30:log"
                 for m in (1, 2, 4, 8, 16)],
        "plot": {
            "title": "Rate per link vs blocklength, rho=10 dB, eps=1e-7",
            "x": "n", "xlabel": "Blocklength n", "ylabel": "Rate per link (bits/use)",
            "logx": True, "logy": False,
            "group": "m", "group_label": "m",
            "series": [
                ("rate_st_per_link", "ST"),
                ("rate_td_per_link", "TD"),
            ],
            "reference": ("shannon", "Shannon capacity"),
        },
    },
    "8": {
        "runs": ["compare --tx 4 --rx 4 --snr-db 10 --epsilon 1e-7 --per-link-rate 2 "
                 "--sweep n:10:400:40 --overlay-mc --trials 2000"],
        "plot": {
            "title": "Decoding error probability, m=4, R=2m bits/use",
            "x": "n", "xlabel": "Blocklength n", "ylabel": "Error probability",
            "logx": False, "logy": True,
            "series": [
                ("eps_st", "ST"),
                ("eps_td", "TD"),
                ("mc_eps_st", "ST sim (per-draw average)"),
                ("mc_eps_td", "TD sim (per-draw average)"),
            ],
        },
    },
}


def figure_ids():
    return list(FIGURES)


def _column_index(table: CsvTable, prefix: str) -> int:
    """1-based index of the column whose name (before the unit) is ``prefix``."""
    for i, name in enumerate(table.columns):
        if name.split(" (")[0] == prefix:
            return i + 1
    raise KeyError(prefix)


def _quote(text: str) -> str:
    return '"' + text.replace('"', "'") + '"'


def emit_plot_script(table: CsvTable, figure_id: str, data_path: str = "data.csv") -> str:
    """A self-contained gnuplot script rendering ``table`` like the figure."""
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure id {figure_id!r}; choose from {', '.join(FIGURES)}")
    spec = FIGURES[figure_id]["plot"]
    lines = [
        f"# gnuplot script for figure {figure_id}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        f"set title {_quote(spec['title'])}",
        f"set xlabel {_quote(spec['xlabel'])}",
        f"set ylabel {_quote(spec['ylabel'])}",
        "set key outside right",
        "set grid",
    ]
    if spec.get("logx"):
        lines.append("set logscale x")
    if spec.get("logy"):
        lines.append("set logscale y")
    lines.append(f"data = {_quote(data_path)}")

    clauses = []
    if table.rows:
        xcol = _column_index(table, spec["x"])
        group = spec.get("group")
        if group:
            gcol = _column_index(table, group)
            values = sorted(set(table.column(table.columns[gcol - 1])))
            for g in values:
                for name, label in spec["series"]:
                    ycol = _column_index(table, name)
                    title = _quote(f"{label}, {spec['group_label']}={g:g}")
                    clauses.append(f"data every ::1 using (${gcol}=={g} ? ${xcol} : 1/0):{ycol} "
                                   f"with linespoints title {title}")
        else:
            for name, label in spec["series"]:
                ycol = _column_index(table, name)
                clauses.append(f"data every ::1 using {xcol}:{ycol} with linespoints title {_quote(label)}")
        ref = spec.get("reference")
        if ref:
            value = table.column(table.columns[_column_index(table, ref[0]) - 1])[0]
            clauses.append(f"{value!r} with lines dashtype 2 title {_quote(ref[1])}")
    if not clauses:
        lines.append("set xrange [1:10]" if spec.get("logx") else "set xrange [0:1]")
        lines.append("set yrange [1e-10:1]" if spec.get("logy") else "set yrange [0:1]")
        clauses.append("NaN notitle")
    lines.append("plot " + ", \\\n     ".join(clauses))
    return "\n".join(lines) + "\n"
