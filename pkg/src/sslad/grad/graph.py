"""Static computation graph with reverse-mode differentiation.

A Graph is built once per model. Builder methods append an op record and
return its node id; shapes (excluding the leading batch axis) are inferred
and checked at build time. `forward` replays the node list on concrete
arrays and caches every intermediate; `backward` walks the node list in
exactly the reverse order, accumulating gradients for parameters and
inputs. There is no dynamic control flow.

A single forward/backward is single-threaded and deterministic; graphs and
their ParamSets are plain values and can be handed to another process or
thread wholesale.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import ops
from .params import ParamSpec


class GraphError(Exception):
    pass


class ShapeError(GraphError):
    pass


class NonFiniteError(GraphError):
    pass


@dataclass
class Node:
    kind: str
    inputs: tuple
    params: tuple = ()
    attrs: dict = field(default_factory=dict)
    shape: tuple = ()  # per-sample shape, batch axis excluded
    name: str = ""


@dataclass
class Grads:
    params: dict
    inputs: dict


class Graph:
    def __init__(self):
        self.nodes: list[Node] = []
        self.param_specs: dict[str, ParamSpec] = {}
        self.outputs: list[int] = []
        self.forward_count = 0
        self.check_all_finite = False

    # ---- construction -------------------------------------------------

    def _add(self, node):
        for i in node.inputs:
            if not 0 <= i < len(self.nodes):
                raise GraphError(f"input id {i} does not precede the new node")
        self.nodes.append(node)
        return len(self.nodes) - 1

    def _shape(self, nid):
        return self.nodes[nid].shape

    def _declare_param(self, name, spec):
        have = self.param_specs.get(name)
        if have is not None and have != spec:
            raise GraphError(f"param {name!r} redeclared with a different spec")
        self.param_specs[name] = spec

    def input(self, name, shape):
        for n in self.nodes:
            if n.kind == "input" and n.name == name:
                raise GraphError(f"duplicate input {name!r}")
        return self._add(Node("input", (), shape=tuple(shape), name=name))

    def dense(self, x, name, units, init="he"):
        (in_dim,) = self._shape(x)
        self._declare_param(name + ".w", ParamSpec((in_dim, units), init, in_dim, units))
        self._declare_param(name + ".b", ParamSpec((units,), "zeros", in_dim, units))
        return self._add(
            Node("dense", (x,), (name + ".w", name + ".b"), shape=(units,), name=name)
        )

    def conv2d(self, x, name, channels, kernel=3, stride=1, pad=None, init="he"):
        if stride not in (1, 2):
            raise GraphError("conv2d supports stride 1 or 2")
        if pad is None:
            pad = kernel // 2
        c, h, w = self._shape(x)
        fan_in = c * kernel * kernel
        fan_out = channels * kernel * kernel
        self._declare_param(
            name + ".w", ParamSpec((channels, c, kernel, kernel), init, fan_in, fan_out)
        )
        self._declare_param(name + ".b", ParamSpec((channels,), "zeros", fan_in, fan_out))
        shape = ops.conv2d_shape((c, h, w), channels, kernel, stride, pad)
        if shape[1] < 1 or shape[2] < 1:
            raise ShapeError(f"conv2d {name!r}: empty output {shape}")
        return self._add(
            Node(
                "conv2d",
                (x,),
                (name + ".w", name + ".b"),
                {"stride": stride, "pad": pad},
                shape,
                name,
            )
        )

    def relu(self, x):
        return self._add(Node("relu", (x,), shape=self._shape(x)))

    def sigmoid(self, x):
        return self._add(Node("sigmoid", (x,), shape=self._shape(x)))

    def grl(self, x, lam=1.0):
        if lam < 0:
            raise GraphError("grl lambda must be >= 0")
        return self._add(Node("grl", (x,), attrs={"lam": float(lam)}, shape=self._shape(x)))

    def upsample2(self, x):
        c, h, w = self._shape(x)
        return self._add(Node("upsample2", (x,), shape=(c, 2 * h, 2 * w)))

    def reshape(self, x, shape):
        shape = tuple(shape)
        if math.prod(shape) != math.prod(self._shape(x)):
            raise ShapeError(f"reshape: {self._shape(x)} -> {shape} changes element count")
        return self._add(Node("reshape", (x,), shape=shape))

    def concat(self, xs):
        """Concatenate along the per-sample feature axis (batch preserved)."""
        shapes = [self._shape(x) for x in xs]
        if any(len(s) != 1 for s in shapes):
            raise ShapeError("concat expects rank-1 per-sample inputs")
        return self._add(Node("concat", tuple(xs), shape=(sum(s[0] for s in shapes),)))

    def batch_concat(self, xs):
        """Stack inputs along the batch axis (all inputs share one shape)."""
        shapes = {self._shape(x) for x in xs}
        if len(shapes) != 1:
            raise ShapeError(f"batch_concat: mismatched shapes {shapes}")
        return self._add(Node("batch_concat", tuple(xs), shape=shapes.pop()))

    def batch_half(self, x, part):
        if part not in (0, 1):
            raise GraphError("batch_half part must be 0 or 1")
        return self._add(Node("batch_half", (x,), attrs={"part": part}, shape=self._shape(x)))

    def mean_reduce(self, x):
        """Mean over every element, batch axis included."""
        return self._add(Node("mean_reduce", (x,), shape=()))

    def set_outputs(self, outs):
        self.outputs = list(outs)

    # ---- execution ----------------------------------------------------

    def forward(self, params, inputs):
        """Run the graph on `inputs` (dict name -> array with leading batch axis).

        Returns (outputs, cache); `cache` feeds `backward` and holds every
        node's output plus op-private context (including the parameter
        arrays as seen by this forward).
        """
        self.forward_count += 1
        vals = [None] * len(self.nodes)
        saved = [None] * len(self.nodes)
        for nid, node in enumerate(self.nodes):
            k = node.kind
            if k == "input":
                try:
                    x = inputs[node.name]
                except KeyError:
                    raise GraphError(f"missing input {node.name!r}") from None
                if tuple(x.shape[1:]) != node.shape:
                    raise ShapeError(
                        f"input {node.name!r}: got {x.shape[1:]}, expected {node.shape}"
                    )
                vals[nid] = x
                continue
            xs = [vals[i] for i in node.inputs]
            if k == "dense":
                w, b = (params[p] for p in node.params)
                vals[nid], ctx = ops.dense_fwd(xs[0], w, b)
                saved[nid] = (ctx, w)
            elif k == "conv2d":
                w, b = (params[p] for p in node.params)
                vals[nid], ctx = ops.conv2d_fwd(
                    xs[0], w, b, node.attrs["stride"], node.attrs["pad"]
                )
                saved[nid] = (ctx, w)
            elif k == "relu":
                vals[nid], saved[nid] = ops.relu_fwd(xs[0])
            elif k == "sigmoid":
                vals[nid], saved[nid] = ops.sigmoid_fwd(xs[0])
            elif k == "grl":
                vals[nid], saved[nid] = ops.grl_fwd(xs[0])
            elif k == "upsample2":
                vals[nid], saved[nid] = ops.upsample2_fwd(xs[0])
            elif k == "reshape":
                vals[nid] = xs[0].reshape(xs[0].shape[0], *node.shape)
                saved[nid] = xs[0].shape
            elif k == "concat":
                vals[nid] = np.concatenate(xs, axis=1)
                saved[nid] = [x.shape[1] for x in xs]
            elif k == "batch_concat":
                vals[nid] = np.concatenate(xs, axis=0)
                saved[nid] = [x.shape[0] for x in xs]
            elif k == "batch_half":
                n = xs[0].shape[0]
                if n % 2:
                    raise ShapeError("batch_half needs an even batch")
                h = n // 2
                vals[nid] = xs[0][:h] if node.attrs["part"] == 0 else xs[0][h:]
                saved[nid] = n
            elif k == "mean_reduce":
                vals[nid], saved[nid] = ops.mean_reduce_fwd(xs[0])
            else:  # pragma: no cover
                raise GraphError(f"unknown op {k!r}")
            if self.check_all_finite and not np.all(np.isfinite(vals[nid])):
                raise NonFiniteError(f"non-finite value at node {nid} ({k})")
        outs = [vals[i] for i in self.outputs]
        for i, o in zip(self.outputs, outs):
            if not np.all(np.isfinite(o)):
                raise NonFiniteError(f"non-finite graph output at node {i}")
        return outs, (vals, saved)

    def backward(self, cache, out_grads):
        """Accumulate gradients from `out_grads` (dict node id -> grad array).

        Visits nodes in exactly the reverse construction order. Returns
        Grads with per-parameter and per-input gradient arrays; nodes not
        on a path to a graded output are skipped, and parameters used by
        several nodes receive the sum of their contributions.
        """
        if cache is None:
            raise GraphError("backward called before forward")
        vals, saved = cache
        buf = {}
        for nid, g in out_grads.items():
            want = vals[nid].shape
            g = np.asarray(g)
            if g.shape != want:
                raise ShapeError(f"output grad for node {nid}: {g.shape} != {want}")
            buf[nid] = buf[nid] + g if nid in buf else g
        pgrads = {}
        igrads = {}

        def put(nid, g):
            if nid in buf:
                buf[nid] = buf[nid] + g
            else:
                buf[nid] = g

        def acc_param(name, g):
            if name in pgrads:
                pgrads[name] = pgrads[name] + g
            else:
                pgrads[name] = g

        for nid in range(len(self.nodes) - 1, -1, -1):
            g = buf.pop(nid, None)
            if g is None:
                continue
            node = self.nodes[nid]
            k = node.kind
            if k == "input":
                if node.name in igrads:
                    igrads[node.name] = igrads[node.name] + g
                else:
                    igrads[node.name] = g
                continue
            xs = node.inputs
            if k == "dense":
                ctx, w = saved[nid]
                dx, dw, db = ops.dense_bwd(g, ctx, w)
                put(xs[0], dx)
                acc_param(node.params[0], dw)
                acc_param(node.params[1], db)
            elif k == "conv2d":
                ctx, w = saved[nid]
                dx, dw, db = ops.conv2d_bwd(g, ctx, w, node.attrs["stride"], node.attrs["pad"])
                put(xs[0], dx)
                acc_param(node.params[0], dw)
                acc_param(node.params[1], db)
            elif k == "relu":
                put(xs[0], ops.relu_bwd(g, saved[nid]))
            elif k == "sigmoid":
                put(xs[0], ops.sigmoid_bwd(g, saved[nid]))
            elif k == "grl":
                put(xs[0], ops.grl_bwd(g, node.attrs["lam"]))
            elif k == "upsample2":
                put(xs[0], ops.upsample2_bwd(g))
            elif k == "reshape":
                put(xs[0], g.reshape(saved[nid]))
            elif k == "concat":
                off = 0
                for x, width in zip(xs, saved[nid]):
                    put(x, g[:, off : off + width])
                    off += width
            elif k == "batch_concat":
                off = 0
                for x, n in zip(xs, saved[nid]):
                    put(x, g[off : off + n])
                    off += n
            elif k == "batch_half":
                n = saved[nid]
                full = np.zeros((n,) + g.shape[1:], dtype=g.dtype)
                if node.attrs["part"] == 0:
                    full[: n // 2] = g
                else:
                    full[n // 2 :] = g
                put(xs[0], full)
            elif k == "mean_reduce":
                put(xs[0], ops.mean_reduce_bwd(g, saved[nid]))
            else:  # pragma: no cover
                raise GraphError(f"unknown op {k!r}")
        return Grads(pgrads, igrads)
