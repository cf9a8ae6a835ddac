"""Strongly connected components (iterative Tarjan)."""


def strongly_connected_components(n, successors):
    """Return the SCCs of a digraph on vertices ``0..n-1``.

    ``successors(v)`` yields the heads of the arcs leaving ``v``. Components
    come out in reverse topological order, each as a sorted list.
    """
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0

    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] is None:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def is_nontrivial(comp, has_arc):
    """An SCC is nontrivial when it carries at least one arc (so a cycle)."""
    return len(comp) > 1 or has_arc(comp[0], comp[0])
