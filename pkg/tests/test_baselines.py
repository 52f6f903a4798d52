import numpy as np
import pytest

from kpseq.baselines import (
    RankedPhrases,
    WordGraph,
    baseline_evaluate,
    is_content_word,
    kea_rank,
    kea_train,
    pagerank,
    singlerank,
    textrank,
)
from kpseq.corpus import Document, Label

B, I, O = Label.KB, Label.KI, Label.KO


def doc_from_text(doc_id, text, phrases=()):
    from kpseq.corpus import tag_bio, tokenize

    tokens = tokenize(text)
    return Document.from_labels(doc_id, tokens, tag_bio(tokens, list(phrases)))


def pagerank_oracle(graph, damping=0.85, iters=5000):
    """Dense fixed-point iteration written independently of the implementation."""
    nodes = sorted(set(graph.nodes))
    idx = {w: i for i, w in enumerate(nodes)}
    n = len(nodes)
    W = np.zeros((n, n))
    for (u, v), w in graph.weights.items():
        W[idx[u], idx[v]] += w
        W[idx[v], idx[u]] += w
    p = np.full(n, 1 / n)
    for _ in range(iters):
        new = np.full(n, (1 - damping) / n)
        for j in range(n):
            deg = W[j].sum()
            if deg == 0:
                new += damping * p[j] / n
            else:
                for i2 in range(n):
                    new[i2] += damping * p[j] * W[j, i2] / deg
        p = new
    return {w: p[idx[w]] for w in nodes}


class TestPagerank:
    def test_three_cycle_uniform(self):
        g = WordGraph(nodes=["a", "b", "c"])
        g.add_edge("a", "b")
        g.add_edge("b", "c")
        g.add_edge("c", "a")
        result = pagerank(g)
        for v in result.scores.values():
            assert v == pytest.approx(1 / 3, abs=1e-6)

    def test_complete_graph_uniform(self):
        words = ["a", "b", "c", "d", "e"]
        g = WordGraph(nodes=words)
        for i, u in enumerate(words):
            for v in words[i + 1 :]:
                g.add_edge(u, v)
        result = pagerank(g)
        for v in result.scores.values():
            assert v == pytest.approx(1 / 5, abs=1e-6)

    def test_two_node_symmetric(self):
        g = WordGraph(nodes=["x", "y"])
        g.add_edge("x", "y")
        result = pagerank(g, damping=0.85)
        assert result.scores["x"] == pytest.approx(0.5, abs=1e-9)
        assert result.scores["y"] == pytest.approx(0.5, abs=1e-9)

    def test_scores_sum_to_one_nonnegative(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            words = [f"w{i}" for i in range(8)]
            g = WordGraph(nodes=words)
            for _ in range(15):
                u, v = rng.choice(words, size=2, replace=False)
                g.add_edge(str(u), str(v), float(rng.uniform(0.5, 3)))
            result = pagerank(g)
            assert sum(result.scores.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(s >= 0 for s in result.scores.values())

    def test_matches_independent_oracle(self):
        g = WordGraph(nodes=["a", "b", "c", "d"])
        g.add_edge("a", "b", 2.0)
        g.add_edge("b", "c", 1.0)
        g.add_edge("c", "d", 3.0)
        g.add_edge("a", "c", 1.5)
        got = pagerank(g, tol=1e-12, max_iter=10000).scores
        want = pagerank_oracle(g)
        for w in got:
            assert got[w] == pytest.approx(want[w], abs=1e-6)

    def test_ranking_invariant_to_weight_scaling(self):
        g1 = WordGraph(nodes=["a", "b", "c"])
        g2 = WordGraph(nodes=["a", "b", "c"])
        for g, scale in ((g1, 1.0), (g2, 10.0)):
            g.add_edge("a", "b", 2.0 * scale)
            g.add_edge("b", "c", 1.0 * scale)
        r1 = pagerank(g1).scores
        r2 = pagerank(g2).scores
        order1 = sorted(r1, key=r1.get)
        order2 = sorted(r2, key=r2.get)
        assert order1 == order2

    def test_empty_graph(self):
        with pytest.raises(ValueError):
            pagerank(WordGraph(nodes=[]))

    def test_nonconvergence_flag(self):
        g = WordGraph(nodes=["a", "b"])
        g.add_edge("a", "b")
        assert pagerank(g, tol=0.0, max_iter=3).converged is False


class TestTextrank:
    def test_hub_word_ranks_first(self):
        # "core" co-occurs (window 2) with every other content word
        text = "core alpha core beta core gamma core delta"
        doc = doc_from_text("d", text)
        ranked = textrank(doc, top_frac=1.0)
        scores = dict(ranked.items)
        # the single-word phrase containing the hub outranks others
        hub_score = max(s for p, s in scores.items() if "core" in p.split())
        others = [s for p, s in scores.items() if "core" not in p.split()]
        assert all(hub_score >= s for s in others)

    def test_single_content_word(self):
        doc = doc_from_text("d", "the of simulation the of")
        ranked = textrank(doc)
        assert ranked.items[0][0] == "simulation"
        assert len(ranked.items) == 1

    def test_deterministic(self):
        doc = doc_from_text("d", "graph ranking for keyword graph extraction ranking")
        assert textrank(doc).items == textrank(doc).items


class TestSinglerank:
    def test_symmetry_case(self):
        doc = doc_from_text("d", "alpha beta alpha beta")
        ranked = singlerank(doc)
        assert len(ranked.items) >= 1

    def test_weighted_hand_case(self):
        # beta occurs more often near alpha; higher-degree words score higher
        text = "alpha beta alpha beta alpha beta gamma"
        doc = doc_from_text("d", text)
        graph_scores = {}
        ranked = singlerank(doc)
        for p, s in ranked.items:
            for w in p.split():
                graph_scores[w] = s
        assert set(w for p, _ in ranked.items for w in p.split()) <= {"alpha", "beta", "gamma"}
        # gamma, on the graph periphery, never outranks the top phrase
        top_phrase = ranked.items[0][0]
        assert "gamma" != top_phrase

    def test_top_k(self):
        doc = doc_from_text("d", "one of two of three of four of five")
        assert len(singlerank(doc, k=2).items) == 2

    def test_deterministic(self):
        doc = doc_from_text("d", "signal noise signal filter noise response")
        assert singlerank(doc).items == singlerank(doc).items


class TestKea:
    def make_training_corpus(self):
        docs = []
        # "neural network" appears early and often, and is gold
        for i in range(8):
            docs.append(
                doc_from_text(
                    f"t{i}",
                    "neural network methods for data . filler words follow here . "
                    "late rare mention",
                    ["neural network"],
                )
            )
        return docs

    def test_posterior_in_open_interval(self):
        model = kea_train(self.make_training_corpus())
        for tfidf in (0.0, 0.1, 5.0):
            for pos in (0.0, 0.5, 1.0):
                post = model.posterior(tfidf, pos)
                assert 0.0 < post < 1.0

    def test_gold_like_candidate_outranks_rare_late_one(self):
        docs = self.make_training_corpus()
        model = kea_train(docs)
        test_doc = doc_from_text(
            "x",
            "neural network approach . filler words follow here . late rare mention",
            ["neural network"],
        )
        ranked = kea_rank(model, test_doc)
        scores = dict(ranked.items)
        assert scores["neural network"] > scores["mention"]

    def test_idf_zero_for_ubiquitous_term(self):
        model = kea_train(self.make_training_corpus())
        assert model.idf["neural"] == pytest.approx(0.0)

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            kea_train([])


class TestBaselineEvaluate:
    def test_perfect_method_scores_one(self, monkeypatch):
        import kpseq.baselines as bl

        doc = doc_from_text("d", "sparse coding of dense word embeddings", ["sparse coding"])
        monkeypatch.setattr(
            bl, "textrank",
            lambda d, top_frac=1 / 3: RankedPhrases(items=[("sparse coding", 1.0)]),
        )
        metrics = bl.baseline_evaluate("textrank", [doc])
        assert metrics.f1 == 1.0

    def test_disjoint_method_scores_zero(self, monkeypatch):
        import kpseq.baselines as bl

        doc = doc_from_text("d", "sparse coding of dense word embeddings", ["sparse coding"])
        monkeypatch.setattr(
            bl, "textrank",
            lambda d, top_frac=1 / 3: RankedPhrases(items=[("unrelated stuff", 1.0)]),
        )
        assert bl.baseline_evaluate("textrank", [doc]).f1 == 0.0

    def test_unknown_method(self):
        doc = doc_from_text("d", "a b c")
        with pytest.raises(ValueError, match="unknown method"):
            baseline_evaluate("sgrank", [doc])

    def test_oracle_k_cutoff(self):
        doc = doc_from_text(
            "d", "graph ranking algorithms for keyword extraction", ["graph ranking"]
        )
        m = baseline_evaluate("singlerank", [doc])
        assert m.n_pred <= len(doc.gold_phrases)


def test_content_word_filter():
    assert is_content_word("simulation")
    assert not is_content_word("the")
    assert not is_content_word(".")
    assert not is_content_word("42nd")
    assert not is_content_word("123")
