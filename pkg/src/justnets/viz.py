"""Render nets to image files.

Places are drawn as circles carrying their initial tokens, transitions as
boxes carrying their labels, flow arcs as arrows, and read arcs as dashed
lines without arrowheads.  The layout comes from a fixed-seed force
simulation, so rendering the same net twice gives the same picture.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from .net import label_str, node_names, render_id


def _display_labels(n, names):
    """Text shown inside each node: place ids (shortened when structured)
    and transition labels."""
    out = {}
    for s in n.sorted_places():
        text = render_id(s)
        if len(text) > 12:
            text = names[s]
        out[names[s]] = text
    for t in n.sorted_transitions():
        out[names[t]] = label_str(n.label[t])
    return out


def net_figure(n, title=None):
    """Build and return a matplotlib figure of the net."""
    names = node_names(n)
    g = nx.DiGraph()
    places = [names[s] for s in n.sorted_places()]
    trans = [names[t] for t in n.sorted_transitions()]
    g.add_nodes_from(places + trans)
    flow_edges = []
    read_edges = []
    for t in n.sorted_transitions():
        for s, _ in sorted(n.preset(t).items(), key=lambda i: names[i[0]]):
            flow_edges.append((names[s], names[t]))
        for s, _ in sorted(n.postset(t).items(), key=lambda i: names[i[0]]):
            flow_edges.append((names[t], names[s]))
        for s, _ in sorted(n.readset(t).items(), key=lambda i: names[i[0]]):
            read_edges.append((names[s], names[t]))
    g.add_edges_from(flow_edges + read_edges)

    pos = nx.spring_layout(g, seed=4, k=1.2)
    side = max(3.0, 1.1 * (len(places) + len(trans)) ** 0.5 + 1.5)
    fig, ax = plt.subplots(figsize=(side, side))
    nx.draw_networkx_nodes(g, pos, nodelist=places, node_shape="o",
                           node_color="white", edgecolors="black",
                           node_size=900, ax=ax)
    nx.draw_networkx_nodes(g, pos, nodelist=trans, node_shape="s",
                           node_color="#e8e8e8", edgecolors="black",
                           node_size=900, ax=ax)
    nx.draw_networkx_edges(g, pos, edgelist=flow_edges, ax=ax,
                           arrows=True, arrowsize=14, node_size=1000)
    nx.draw_networkx_edges(g, pos, edgelist=read_edges, ax=ax,
                           arrows=False, style="dashed", node_size=1000)
    labels = _display_labels(n, names)
    nx.draw_networkx_labels(g, pos, labels=labels, font_size=8, ax=ax)
    marked = {names[s]: "•" * min(c, 4) if c <= 4 else "(%d)" % c
              for s, c in n.m0.items()}
    for node, text in sorted(marked.items()):
        x, y = pos[node]
        ax.text(x, y - 0.13, text, ha="center", va="top", fontsize=11)
    if title:
        ax.set_title(title)
    ax.set_axis_off()
    fig.tight_layout()
    return fig


def save_net_figure(n, path, title=None):
    """Render the net and write the image to path."""
    fig = net_figure(n, title=title)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
