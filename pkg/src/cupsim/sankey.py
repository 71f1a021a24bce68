"""Sankey flow data and SVG rendering of a stage-probability forecast.

Stages form fixed columns (group entry through champion) with one node per
surviving team per stage plus a drop-out sink per stage. Each team's link
into the next column carries its probability of reaching that stage; the
remainder flows into the sink. Edge stroke widths in the SVG are linear in
the link probabilities.
"""

from __future__ import annotations

import json

import numpy as np

STAGES = ("group", "r16", "quarter", "semi", "final", "champion")

# Rendering constants (pixels).
_COL_GAP = 170.0
_NODE_WIDTH = 12.0
_NODE_GAP = 4.0
_MASS_SCALE = 26.0       # node height / link width per unit probability
_MARGIN_X = 70.0
_MARGIN_Y = 30.0
_FONT_SIZE = 8.0


def _reach_chain(probs: np.ndarray) -> list[float]:
    """Survival mass per stage column: entry, R16, QF, SF, final, champion."""
    p = np.asarray(probs, dtype=float)
    reach = [1.0,
             float(1.0 - p[5]),
             float(p[0] + p[1] + p[2] + p[3]),
             float(p[0] + p[1] + p[2]),
             float(p[0] + p[1]),
             float(p[0])]
    return reach


def build_flow(probabilities: dict[str, np.ndarray], metadata: dict | None = None) -> dict:
    """Assemble Sankey nodes and links from per-team outcome distributions.

    Nodes are (team, stage) pairs with positive survival mass plus one
    ``out@stage`` sink per stage before champion; links carry the estimated
    transition probabilities.
    """
    nodes = []
    links = []
    for stage_idx, stage in enumerate(STAGES):
        stage_teams = []
        for team in probabilities:
            mass = _reach_chain(probabilities[team])[stage_idx]
            if mass > 0.0:
                stage_teams.append((mass, team))
        stage_teams.sort(key=lambda item: (-item[0], item[1]))
        for mass, team in stage_teams:
            nodes.append({"id": f"{team}@{stage}", "team": team,
                          "stage": stage, "mass": mass})
        if stage_idx < len(STAGES) - 1:
            drop_mass = sum(_reach_chain(probabilities[t])[stage_idx]
                            - _reach_chain(probabilities[t])[stage_idx + 1]
                            for t in probabilities)
            nodes.append({"id": f"out@{stage}", "team": None,
                          "stage": stage, "mass": drop_mass})

    for team, probs in sorted(probabilities.items()):
        reach = _reach_chain(probs)
        for stage_idx in range(len(STAGES) - 1):
            survive = reach[stage_idx + 1]
            drop = reach[stage_idx] - reach[stage_idx + 1]
            if survive > 0.0:
                links.append({"source": f"{team}@{STAGES[stage_idx]}",
                              "target": f"{team}@{STAGES[stage_idx + 1]}",
                              "value": survive})
            if drop > 0.0:
                links.append({"source": f"{team}@{STAGES[stage_idx]}",
                              "target": f"out@{STAGES[stage_idx]}",
                              "value": drop})
    return {"metadata": metadata or {}, "stages": list(STAGES),
            "nodes": nodes, "links": links}


def flow_to_json(flow: dict) -> str:
    return json.dumps(flow, indent=2)


def _team_color(name: str) -> str:
    # Stable pseudo-color from the team name.
    h = 0
    for ch in name:
        h = (h * 31 + ord(ch)) % 360
    return f"hsl({h},55%,45%)"


def render_svg(flow: dict) -> str:
    """Render the flow as a standalone SVG document.

    Stroke widths equal ``value * 26`` pixels, a purely linear map of the
    link probabilities.
    """
    positions: dict[str, dict] = {}
    stage_x = {stage: _MARGIN_X + i * _COL_GAP for i, stage in enumerate(flow["stages"])}
    max_height = 0.0
    for stage in flow["stages"]:
        y = _MARGIN_Y
        for node in flow["nodes"]:
            if node["stage"] != stage:
                continue
            height = max(node["mass"] * _MASS_SCALE, 0.6)
            positions[node["id"]] = {
                "x": stage_x[stage], "y": y, "height": height,
                "out_cursor": y, "in_cursor": y, "node": node,
            }
            y += height + _NODE_GAP
        max_height = max(max_height, y)

    width = _MARGIN_X * 2 + (len(flow["stages"]) - 1) * _COL_GAP + _NODE_WIDTH + 60
    height = max_height + _MARGIN_Y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for stage in flow["stages"]:
        parts.append(
            f'<text x="{stage_x[stage] + _NODE_WIDTH / 2:.1f}" y="{_MARGIN_Y - 12:.1f}" '
            f'font-family="sans-serif" font-size="10" text-anchor="middle" '
            f'fill="#444">{stage}</text>')

    for link in flow["links"]:
        src = positions[link["source"]]
        dst = positions[link["target"]]
        stroke = link["value"] * _MASS_SCALE
        y0 = src["out_cursor"] + stroke / 2.0
        src["out_cursor"] += stroke
        y1 = dst["in_cursor"] + stroke / 2.0
        dst["in_cursor"] += stroke
        x0 = src["x"] + _NODE_WIDTH
        x1 = dst["x"]
        cx = (x0 + x1) / 2.0
        team = src["node"]["team"] or "out"
        color = "#bbbbbb" if dst["node"]["team"] is None else _team_color(team)
        parts.append(
            f'<path d="M {x0:.2f} {y0:.2f} C {cx:.2f} {y0:.2f} {cx:.2f} {y1:.2f} '
            f'{x1:.2f} {y1:.2f}" fill="none" stroke="{color}" '
            f'stroke-opacity="0.45" stroke-width="{stroke:.4f}"/>')

    for node_id, pos in positions.items():
        node = pos["node"]
        fill = "#888888" if node["team"] is None else _team_color(node["team"])
        parts.append(
            f'<rect x="{pos["x"]:.1f}" y="{pos["y"]:.2f}" width="{_NODE_WIDTH:.1f}" '
            f'height="{pos["height"]:.2f}" fill="{fill}"/>')
        label = node["team"] if node["team"] is not None else "out"
        if node["mass"] * _MASS_SCALE >= 3.0 or node["team"] is None:
            anchor_left = node["stage"] == flow["stages"][-1]
            tx = pos["x"] + (_NODE_WIDTH + 3 if anchor_left else -3)
            anchor = "start" if anchor_left else "end"
            parts.append(
                f'<text x="{tx:.1f}" y="{pos["y"] + pos["height"] / 2 + 2.5:.2f}" '
                f'font-family="sans-serif" font-size="{_FONT_SIZE:.0f}" '
                f'text-anchor="{anchor}" fill="#222">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
