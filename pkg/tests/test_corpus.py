import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from baitpress.corpus import (
    CLICKBAIT,
    NO_CLICKBAIT,
    CorpusFormatError,
    Dataset,
    dataset_stats,
    derive_class,
    instances_to_jsonl,
    make_label,
    parse_instances,
    parse_truth,
)

EXAMPLE_LINE = json.dumps(
    {
        "id": "608999590243741697",
        "postTimestamp": "Thu Jun 11 14:09:51 2015",
        "postText": ["Some people are such food snobs"],
        "postMedia": ["608999590243741697.png"],
        "targetTitle": "Some people are such food snobs",
        "targetDescription": "You'll never guess one...",
        "targetKeywords": "food, foodfront, food waste...",
        "targetParagraphs": ["What a drag it is, eating kale ...", "A new study ..."],
        "targetCaptions": ["(Flikr/USDA)"],
    }
)


class TestParseInstances:
    def test_full_example_object(self):
        (post,) = parse_instances(EXAMPLE_LINE)
        assert post.id == "608999590243741697"
        assert post.post_text == ["Some people are such food snobs"]
        assert post.target_captions == ["(Flikr/USDA)"]
        assert post.post_timestamp == "Thu Jun 11 14:09:51 2015"

    def test_absent_keys_default_empty(self):
        (post,) = parse_instances('{"id":"1"}')
        assert post.id == "1"
        assert post.post_text == []
        assert post.target_title == ""
        assert post.target_paragraphs == []
        assert post.post_timestamp is None

    def test_empty_stream(self):
        assert parse_instances("") == []
        assert parse_instances("\n\n") == []

    def test_unknown_keys_ignored(self):
        (post,) = parse_instances('{"id":"1","wat":42}')
        assert post.id == "1"

    def test_malformed_line_reports_line_number(self):
        with pytest.raises(CorpusFormatError, match="line 2"):
            parse_instances('{"id":"1"}\n{oops\n')

    def test_duplicate_id_reported(self):
        with pytest.raises(CorpusFormatError, match="duplicate post id '7'"):
            parse_instances('{"id":"7"}\n{"id":"7"}')

    def test_missing_id(self):
        with pytest.raises(CorpusFormatError, match="id"):
            parse_instances('{"postText":["x"]}')

    def test_order_is_stable(self):
        posts = parse_instances('{"id":"b"}\n{"id":"a"}\n{"id":"c"}')
        assert [p.id for p in posts] == ["b", "a", "c"]

    def test_roundtrip(self, mini_paths):
        with open(mini_paths["instances"], encoding="utf-8") as fh:
            posts = parse_instances(fh)
        again = parse_instances(instances_to_jsonl(posts))
        assert again == posts


class TestParseTruth:
    def test_paper_worked_example_mean(self):
        labels = parse_truth(
            '{"id":"1","truthJudgments":[0,0,0,0.33333,0.66667]}'
        )
        assert abs(labels["1"].mean - 0.2) <= 0.005
        assert labels["1"].judgments == (0.0, 0.0, 0.0, 1 / 3, 2 / 3)

    def test_all_ones(self):
        labels = parse_truth('{"id":"1","truthJudgments":[1,1,1]}')
        assert labels["1"].mean == 1.0
        assert labels["1"].std == 0.0

    def test_population_std_matches_oracle(self):
        # independent 5-line oracle for the population std
        judgments = [0.0, 0.0, 0.0, 1 / 3, 2 / 3]
        mean = sum(judgments) / len(judgments)
        expected = math.sqrt(sum((v - mean) ** 2 for v in judgments) / len(judgments))
        labels = parse_truth('{"id":"1","truthJudgments":[0,0,0,0.33333,0.66667]}')
        assert labels["1"].std == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(0.26666, abs=1e-4)

    def test_judgment_out_of_range(self):
        with pytest.raises(CorpusFormatError, match="outside"):
            parse_truth('{"id":"1","truthJudgments":[1.5]}')
        with pytest.raises(CorpusFormatError, match="outside"):
            parse_truth('{"id":"1","truthJudgments":[-0.2]}')

    def test_judgment_off_scale(self):
        with pytest.raises(CorpusFormatError, match="scale"):
            parse_truth('{"id":"1","truthJudgments":[0.5]}')

    def test_empty_judgments(self):
        with pytest.raises(CorpusFormatError, match="empty judgment"):
            parse_truth('{"id":"1","truthJudgments":[]}')

    def test_duplicate_truth_id(self):
        with pytest.raises(CorpusFormatError, match="duplicate truth id"):
            parse_truth(
                '{"id":"1","truthJudgments":[0]}\n{"id":"1","truthJudgments":[1]}'
            )

    def test_scalar_coercion(self):
        (post,) = parse_instances(
            '{"id": 42, "targetTitle": 7, "postText": ["a", 3]}'
        )
        assert post.id == "42"
        assert post.target_title == "7"
        assert post.post_text == ["a", "3"]

    def test_wrong_container_types_rejected(self):
        with pytest.raises(CorpusFormatError, match="string"):
            parse_instances('{"id":"1","targetTitle":["not","a","string"]}')
        with pytest.raises(CorpusFormatError, match="list"):
            parse_instances('{"id":"1","postText":{"nested":"object"}}')

    def test_stored_mean_checked(self):
        with pytest.raises(CorpusFormatError, match="truthMean"):
            parse_truth('{"id":"1","truthJudgments":[1,1,1],"truthMean":0.5}')
        labels = parse_truth('{"id":"1","truthJudgments":[1,1,1],"truthMean":1.0}')
        assert labels["1"].mean == 1.0

    def test_snapping_tolerance(self):
        labels = parse_truth('{"id":"1","truthJudgments":[0.339, 0.675, 0.008, 0.995]}')
        assert labels["1"].judgments == (1 / 3, 2 / 3, 0.0, 1.0)

    @given(st.lists(st.sampled_from([0.0, 0.33333, 0.66667, 1.0]), min_size=1, max_size=12))
    def test_label_invariants(self, judgments):
        label = make_label("x", judgments)
        assert min(label.judgments) <= label.mean <= max(label.judgments)
        assert (label.std == 0.0) == (len(set(label.judgments)) == 1)


class TestDeriveClass:
    def test_paper_example_not_clickbait(self):
        assert derive_class(make_label("1", [0, 0, 0, 0.33333, 0.66667])) == NO_CLICKBAIT

    def test_mean_one(self):
        assert derive_class(make_label("1", [1, 1])) == CLICKBAIT

    def test_exact_tie_goes_to_no_clickbait(self):
        label = make_label("1", [0.0, 1.0])
        assert label.mean == 0.5
        assert derive_class(label) == NO_CLICKBAIT


class TestDatasetStats:
    def test_empty(self):
        stats = dataset_stats(Dataset(posts=[], labels={}))
        assert stats == dataset_stats(Dataset(posts=[], labels={}))
        assert stats.n_posts == 0
        assert stats.n_clickbait == 0

    def test_unlabeled_has_no_class_counts(self):
        posts = parse_instances('{"id":"1"}')
        stats = dataset_stats(Dataset(posts=posts))
        assert stats.n_posts == 1
        assert stats.n_clickbait is None
        assert stats.n_no_clickbait is None

    def test_mini_corpus_matches_manifest(self, mini_dataset, mini_paths):
        stats = dataset_stats(mini_dataset)
        manifest = mini_paths["manifest"]
        assert stats.n_posts == manifest["n_posts"]
        assert stats.n_clickbait == manifest["n_clickbait"]
        assert stats.n_no_clickbait == manifest["n_no_clickbait"]

    def test_label_post_mismatch_rejected(self):
        posts = parse_instances('{"id":"1"}')
        labels = parse_truth('{"id":"2","truthJudgments":[0]}')
        with pytest.raises(CorpusFormatError):
            Dataset(posts=posts, labels=labels)

    def test_public_corpus_class_split(self):
        from baitpress.corpus import load_dataset
        from conftest import public_corpus_paths

        paths = public_corpus_paths()
        if paths is None:
            pytest.skip("public corpus not available (set BAITPRESS_CORPUS_DIR)")
        stats = dataset_stats(load_dataset(paths["instances"], paths["truth"]))
        assert stats.n_posts == 19538
        assert stats.n_clickbait == 4761
        assert stats.n_no_clickbait == 14777
