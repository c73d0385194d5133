"""Exception hierarchy for the toolkit.

Every error is a LinktomoError so callers can catch the whole family; the
CLI maps subclasses to exit codes (usage=1, gate=2, identity=3).
"""


class LinktomoError(Exception):
    """Base class for all toolkit errors."""


class GraphError(LinktomoError):
    """Invalid graph input."""


class DuplicateLink(GraphError):
    def __init__(self, link):
        super().__init__(f"duplicate link {link!r}")
        self.link = link


class SelfLoop(GraphError):
    def __init__(self, node):
        super().__init__(f"self loop at node {node!r}")
        self.node = node


class UnknownEndpoint(GraphError):
    def __init__(self, node):
        super().__init__(f"link endpoint {node!r} is not a declared node")
        self.node = node


class NoNonCutvertexMonitor(LinktomoError):
    """Every monitor is a cutvertex; the instance is not identifiable."""


class NotIdentifiable(LinktomoError):
    """The extended graph failed the 3-vertex-connectivity gate."""


class DecompositionFailed(LinktomoError):
    """Ear search exhausted without a valid decomposition.

    Carries the partial ear list and the condition that could not be met.
    """

    def __init__(self, message, ears=None):
        super().__init__(message)
        self.ears = list(ears or [])


class NoEligibleParent(LinktomoError):
    def __init__(self, tree, node):
        super().__init__(f"tree {tree}: no eligible parent for node {node!r}")
        self.tree = tree
        self.node = node


class NonSimpleUnion(LinktomoError):
    def __init__(self, node, i, j):
        super().__init__(f"segments {i},{j} of node {node!r} do not form a simple path")
        self.node = node
        self.trees = (i, j)


class NoEmbeddingPath(LinktomoError):
    """No pair of disjoint monitor arms exists for a non-tree link."""


class MissingMetric(LinktomoError):
    def __init__(self, link):
        super().__init__(f"no metric available for link {link!r}")
        self.link = link


class InconsistentDerivation(LinktomoError):
    def __init__(self, link, values):
        super().__init__(f"link {link!r} derived with disagreeing values {values}")
        self.link = link
        self.values = values


class SingularMatrix(LinktomoError):
    """Measurement matrix is not square full rank."""


class NonPathResidue(LinktomoError):
    """Cycle residue after virtual-link removal is not a single simple path."""


class IdentityViolation(LinktomoError):
    """A counting identity failed; operands are embedded in the message."""

    def __init__(self, name, detail=""):
        super().__init__(f"identity {name} violated" + (f": {detail}" if detail else ""))
        self.name = name


class GenerationExhausted(LinktomoError):
    """Random graph generator failed to produce a connected graph."""


class InvariantViolation(LinktomoError):
    """An internal construction post-condition failed (implementation bug)."""
