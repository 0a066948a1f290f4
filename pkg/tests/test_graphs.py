"""测试图模型与拓扑算法"""

from itertools import combinations

import numpy as np
import pytest

from germrenorm.core.exceptions import (
    DisconnectedGraphError,
    GraphError,
    InvalidPermutationError,
    ResourceCapError,
    TiedLengthsError,
    UnknownEdgeError,
)
from germrenorm.germs.forms import LinearForm
from germrenorm.graphs.model import FeynmanGraph, LabelledGraph, MetricGraph, make_graph
from germrenorm.graphs.topology import (
    betti,
    check_permutation,
    connected_components,
    disjoint_union,
    divergent_subgraphs,
    edge_partition_by_vertex_split,
    enumerate_sectors,
    fundamental_cycle,
    fundamental_cycles,
    induced_subgraph,
    is_connected,
    kruskal_tree,
    max_divergent_steps,
    sector_divergence_profile,
    sector_filtration,
    spanning_subgraph,
    tree_path,
)


def banana(n_edges: int) -> FeynmanGraph:
    return FeynmanGraph((1, 2), ((1, 2),) * n_edges)


@pytest.fixture
def triangle():
    return FeynmanGraph((1, 2, 3), ((1, 2), (2, 3), (1, 3)))


class TestFeynmanGraph:
    """图的数据校验"""

    def test_default_edge_ids(self, triangle):
        """测试默认边编号为 1..E"""
        assert triangle.edge_ids == (1, 2, 3)
        assert triangle.edge(3) == (1, 3)
        assert triangle.n_vertices == 3

    def test_duplicate_vertices(self):
        """测试重复顶点"""
        with pytest.raises(GraphError, match="duplicate vertex"):
            FeynmanGraph((1, 1), ((1, 1),))

    def test_self_loop(self):
        """测试自环被拒绝"""
        with pytest.raises(GraphError, match="self-loop"):
            FeynmanGraph((1, 2), ((1, 1),))

    def test_dangling_endpoint(self):
        """测试端点不在顶点集中"""
        with pytest.raises(GraphError, match="outside the vertex set"):
            FeynmanGraph((1, 2), ((1, 3),))

    def test_malformed_edge(self):
        """测试边必须有两个端点"""
        with pytest.raises(GraphError, match="two endpoints"):
            make_graph([1, 2], [[1, 2, 3]])

    def test_unknown_edge(self, triangle):
        """测试不存在的边编号"""
        with pytest.raises(UnknownEdgeError, match="unknown edge index 7"):
            triangle.edge(7)
        with pytest.raises(UnknownEdgeError):
            triangle.check_edges([1, 9])

    def test_relabelled_keeps_edge_ids(self, triangle):
        """测试重命名顶点保持边编号"""
        renamed = triangle.relabelled({1: 10, 2: 20, 3: 30})
        assert renamed.edges == ((10, 20), (20, 30), (10, 30))
        assert renamed.edge_ids == triangle.edge_ids

    def test_labels(self):
        """测试热核标号"""
        labelled = make_graph([1, 2], [[1, 2], [1, 2]], [0, 2])
        assert labelled.label(2) == 2
        assert make_graph([1, 2], [[1, 2]]).labels == (0,)
        with pytest.raises(GraphError, match="labels given"):
            LabelledGraph(banana(2), (1,))
        with pytest.raises(GraphError, match="nonnegative"):
            LabelledGraph(banana(1), (-1,))

    def test_lengths(self):
        """测试度量图的长度"""
        metric = MetricGraph(banana(3), (0.3, 0.1, 0.2))
        assert metric.order() == (2, 3, 1)
        assert metric.is_strict
        assert not MetricGraph(banana(2), (0.5, 0.5)).is_strict
        with pytest.raises(GraphError, match="positive"):
            MetricGraph(banana(2), (0.5, 0.0))


class TestTopology:
    """连通性, Betti 数与子图"""

    def test_components_and_betti(self):
        """测试连通分支与第一 Betti 数"""
        graph = FeynmanGraph((1, 2, 3, 4), ((1, 2), (1, 2), (3, 4)))
        assert connected_components(graph) == [(1, 2), (3, 4)]
        assert not is_connected(graph)
        assert betti(graph) == 1
        assert betti(banana(3)) == 2

    def test_induced_subgraph_keeps_ids(self, triangle):
        """测试诱导子图保留父图的边编号"""
        sub = induced_subgraph(triangle, [3, 2])
        assert sub.edge_ids == (2, 3)
        assert sub.vertices == (1, 2, 3)
        assert induced_subgraph(triangle, [1]).vertices == (1, 2)
        assert spanning_subgraph(triangle, [1]).vertices == (1, 2, 3)

    def test_disjoint_union(self, triangle):
        """测试不交并的顶点重新编号"""
        union = disjoint_union(triangle, banana(2))
        assert union.vertices == (1, 2, 3, 4, 5)
        assert union.edges[-2:] == ((4, 5), (4, 5))
        assert union.edge_ids == (1, 2, 3, 4, 5)

    def test_vertex_split(self, triangle):
        """测试按顶点划分边"""
        inside, outside, crossing = edge_partition_by_vertex_split(triangle, [1, 2])
        assert inside == {1}
        assert outside == frozenset()
        assert crossing == {2, 3}
        with pytest.raises(GraphError):
            edge_partition_by_vertex_split(triangle, [7])


class TestKruskalTree:
    """长度过滤下的 Kruskal 树"""

    def test_triangle(self, triangle):
        """测试三角形的扇区树与基本圈"""
        metric = MetricGraph(triangle, (0.1, 0.2, 0.3))
        result = kruskal_tree(metric)
        assert result.tree_edges == {1, 2}
        assert all(result.per_step_trace_ok)
        (cycle,) = fundamental_cycles(triangle, result.tree_edges)
        assert cycle.edge == 3
        assert cycle.signed == ((1, 1), (2, 1), (3, -1))
        assert cycle.edges == (1, 2, 3)

    def test_tree_path_signs(self, triangle):
        """测试树路径的方向符号"""
        assert tree_path(triangle, {1, 2}, 3, 1) == ((2, -1), (1, -1))
        with pytest.raises(GraphError, match="different trees"):
            tree_path(triangle, {1}, 1, 3)

    def test_fundamental_cycle_checks(self, triangle):
        """测试基本圈的参数检查"""
        with pytest.raises(GraphError, match="belongs to the tree"):
            fundamental_cycle(triangle, {1, 2}, 1)
        with pytest.raises(GraphError, match="spanning forest"):
            fundamental_cycle(triangle, {1}, 3)

    def test_disconnected(self):
        """测试非连通图"""
        graph = FeynmanGraph((1, 2, 3, 4), ((1, 2), (3, 4)))
        with pytest.raises(DisconnectedGraphError):
            kruskal_tree(MetricGraph(graph, (1.0, 2.0)))

    def test_tied_lengths(self, triangle):
        """测试长度相等时报错"""
        with pytest.raises(TiedLengthsError, match="strict metric required"):
            kruskal_tree(MetricGraph(triangle, (0.1, 0.1, 0.3)))

    def test_unique_tree_brute_force(self):
        """测试 200 个随机图上迹条件恰好刻画唯一的 Kruskal 树"""
        for seed in range(200):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, 6))
            edges = [(int(rng.integers(1, v)), v) for v in range(2, n + 1)]
            while len(edges) < 6 and rng.random() < 0.7:
                a, b = rng.choice(np.arange(1, n + 1), size=2, replace=False)
                edges.append((int(a), int(b)))
            graph = FeynmanGraph(tuple(range(1, n + 1)), tuple(edges))
            lengths = tuple(float(x) for x in rng.permutation(len(edges)) + 1)
            metric = MetricGraph(graph, lengths)
            order = metric.order()

            trees = []
            for subset in combinations(graph.edge_ids, n - 1):
                if not is_connected(spanning_subgraph(graph, subset)):
                    continue
                if all(
                    len(set(subset) & set(order[:k])) == sub.n_edges - betti(sub)
                    for k, sub in enumerate(sector_filtration(graph, order), start=1)
                ):
                    trees.append(frozenset(subset))
            assert len(trees) == 1, f"seed {seed}"
            assert kruskal_tree(metric).tree_edges == trees[0], f"seed {seed}"


class TestDivergences:
    """发散子图与极点超平面"""

    def test_banana_two(self):
        """测试 d=4 双边香蕉图"""
        report = divergent_subgraphs(banana(2), 4)
        assert report.divergent_subgraphs == ((1, 2),)
        assert report.hyperplanes == (LinearForm.parse([1, 1]),)
        assert report.order_bound == 1
        assert report.rhs(0) == 2
        assert report.predicts(LinearForm.parse([2, 2]))
        assert not report.predicts(LinearForm.parse([1, 0]))

    def test_banana_three(self):
        """测试 d=4 三边香蕉图"""
        report = divergent_subgraphs(banana(3), 4)
        assert report.divergent_subgraphs == ((1, 2), (1, 3), (2, 3), (1, 2, 3))
        assert report.order_bound == 6

    def test_triangle_convergent(self, triangle):
        """测试 d=4 三角形无发散子图"""
        report = divergent_subgraphs(triangle, 4)
        assert report.divergent_subgraphs == ()
        assert report.order_bound == 0

    def test_low_dimension(self):
        """测试 d=1 时香蕉图收敛"""
        assert divergent_subgraphs(banana(2), 1).divergent_subgraphs == ()

    def test_edge_cap(self):
        """测试边数上限"""
        with pytest.raises(ResourceCapError):
            divergent_subgraphs(banana(4), 4, edge_cap=3)
        with pytest.raises(GraphError):
            divergent_subgraphs(banana(2), 0)

    def test_sectors(self, triangle):
        """测试扇区枚举与过滤"""
        assert len(list(enumerate_sectors(triangle))) == 6
        steps = sector_filtration(triangle, (3, 1, 2))
        assert [s.edge_ids for s in steps] == [(3,), (1, 3), (1, 2, 3)]
        with pytest.raises(InvalidPermutationError):
            check_permutation(triangle, (1, 1, 2))

    def test_sector_profile(self):
        """测试每个扇区的发散步数"""
        profiles = list(sector_divergence_profile(banana(2), 4))
        assert [p.divergent_steps for p in profiles] == [1, 1]
        assert max_divergent_steps(banana(2), 4) == 1
        labelled = list(sector_divergence_profile(banana(2), 4, labels={1: 1}))
        assert all(p.divergent_steps == 0 for p in labelled)
