import os
import tempfile
import unittest

from neural_scl.core.corpus import (
    SplitSpec,
    domain_files,
    domain_from_file,
    load_domains,
    parse_processed,
    parse_tsv,
    read_corpus,
    split,
    tokenize,
)
from neural_scl.utils.errors import CorpusParseError, MissingDataError, MissingLabelsError, SplitSizeError


class CorpusTestCase(unittest.TestCase):
    """带临时目录的测试基类"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, text):
        path = os.path.join(self.dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path


class TestParseProcessed(CorpusTestCase):
    """测试 processed 格式解析"""

    def test_counts_expand_to_tokens(self):
        path = self.write('books.labeled', "great:2 read_it:1 #label#:positive\n"
                                           "\n"
                                           "boring:1 #label#:negative\n")
        corpus = parse_processed(path, 'books')
        self.assertEqual(len(corpus), 2)
        self.assertTrue(corpus.labeled)
        self.assertEqual(corpus.documents[0].tokens, ('great', 'great', 'read_it'))
        self.assertEqual(corpus.documents[1].id, 1)
        self.assertEqual(list(corpus.labels), [1, 0])
        self.assertTrue(all(doc.ngram_features for doc in corpus))

    def test_unlabeled_marker(self):
        path = self.write('books.unlabeled', "a:1 b:1 #label#:unlabeled\nc:3 #label#:unlabeled\n")
        corpus = parse_processed(path, 'books')
        self.assertFalse(corpus.labeled)
        self.assertIsNone(corpus.labels)

    def test_errors_carry_line_number(self):
        path = self.write('bad', "good:1 #label#:positive\nbad_token #label#:negative\n")
        with self.assertRaises(CorpusParseError) as ctx:
            parse_processed(path, 'books')
        self.assertEqual(ctx.exception.line_number, 2)
        self.assertIn(':2:', str(ctx.exception))

    def test_label_marker_must_be_last(self):
        path = self.write('bad', "#label#:positive good:1\n")
        with self.assertRaises(CorpusParseError):
            parse_processed(path, 'books')

    def test_non_positive_count(self):
        path = self.write('bad', "good:0 #label#:positive\n")
        with self.assertRaises(CorpusParseError):
            parse_processed(path, 'books')

    def test_mixed_labeled_and_unlabeled(self):
        path = self.write('mixed', "a:1 #label#:positive\n\nb:1 #label#:unlabeled\n")
        with self.assertRaises(CorpusParseError) as ctx:
            parse_processed(path, 'books')
        self.assertEqual(ctx.exception.line_number, 3)
        self.assertIn('mixed:3:', str(ctx.exception))

    def test_empty_file(self):
        path = self.write('empty', "\n\n")
        with self.assertRaises(CorpusParseError):
            parse_processed(path, 'books')


class TestParseTsv(CorpusTestCase):
    """测试 TSV 格式解析与分词"""

    def test_tokenize_strips_edge_punctuation(self):
        self.assertEqual(tokenize("Great book!!  (Really) it's _fine_ ..."),
                         ['great', 'book', 'really', "it's", 'fine'])

    def test_labeled_lines(self):
        path = self.write('kitchen.labeled.tsv', "1\tWorks great.\nnegative\tBroke fast\n")
        corpus = parse_tsv(path, 'kitchen', labeled=True)
        self.assertEqual(list(corpus.labels), [1, 0])
        self.assertEqual(corpus.documents[0].tokens, ('works', 'great'))
        self.assertFalse(corpus.documents[0].ngram_features)

    def test_unlabeled_lines(self):
        path = self.write('kitchen.unlabeled.tsv', "nice pan\n\nugly lid\n")
        corpus = parse_tsv(path, 'kitchen', labeled=False)
        self.assertEqual(len(corpus), 2)
        self.assertFalse(corpus.labeled)

    def test_bad_label(self):
        path = self.write('bad.tsv', "1\tfine\nmaybe\tnot sure\n")
        with self.assertRaises(CorpusParseError) as ctx:
            parse_tsv(path, 'kitchen', labeled=True)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_missing_tab(self):
        path = self.write('bad.tsv', "no tab here\n")
        with self.assertRaises(CorpusParseError):
            parse_tsv(path, 'kitchen', labeled=True)

    def test_document_without_tokens(self):
        path = self.write('bad.tsv', "1\t!!! ...\n")
        with self.assertRaises(CorpusParseError):
            parse_tsv(path, 'kitchen', labeled=True)

    def test_read_corpus_requires_labels(self):
        path = self.write('dvd.unlabeled', "a:1 #label#:unlabeled\n")
        with self.assertRaises(MissingLabelsError):
            read_corpus(path, 'dvd', labeled=True)


class TestSplit(CorpusTestCase):
    """测试训练/验证切分"""

    def setUp(self):
        super().setUp()
        lines = ''.join(f"w{i}:1 #label#:{'positive' if i % 2 else 'negative'}\n" for i in range(20))
        self.corpus = parse_processed(self.write('books.labeled', lines), 'books')

    def test_sizes_and_disjointness(self):
        train, val = split(self.corpus, SplitSpec(12, 5, seed=3))
        self.assertEqual(len(train), 12)
        self.assertEqual(len(val), 5)
        train_ids = {doc.id for doc in train}
        val_ids = {doc.id for doc in val}
        self.assertFalse(train_ids & val_ids)

    def test_same_seed_same_split(self):
        a = split(self.corpus, SplitSpec(10, 10, seed=7))
        b = split(self.corpus, SplitSpec(10, 10, seed=7))
        self.assertEqual([d.id for d in a[0]], [d.id for d in b[0]])
        self.assertEqual([d.id for d in a[1]], [d.id for d in b[1]])

    def test_full_split_is_permutation(self):
        train, val = split(self.corpus, SplitSpec(15, 5, seed=1))
        self.assertEqual(sorted(d.id for d in list(train) + list(val)), list(range(20)))

    def test_too_large(self):
        with self.assertRaises(SplitSizeError):
            split(self.corpus, SplitSpec(15, 6))

    def test_negative_size(self):
        with self.assertRaises(SplitSizeError):
            SplitSpec(-1, 5)


class TestDomainFiles(CorpusTestCase):
    """测试领域数据文件定位"""

    def test_processed_preferred(self):
        self.write('books.labeled', "a:1 #label#:positive\n")
        self.write('books.unlabeled', "a:1 #label#:unlabeled\n")
        labeled, unlabeled = domain_files(self.dir, 'books')
        self.assertEqual(os.path.basename(labeled), 'books.labeled')
        self.assertEqual(os.path.basename(unlabeled), 'books.unlabeled')

    def test_tsv_fallback(self):
        self.write('dvd.labeled.tsv', "1\tgood film\n")
        self.write('dvd.unlabeled.tsv', "long film\n")
        data = load_domains(self.dir, ['dvd'])
        self.assertTrue(data['dvd'].labeled.labeled)
        self.assertFalse(data['dvd'].unlabeled.labeled)

    def test_missing_domain_reported_before_reading(self):
        self.write('books.labeled', "a:1 #label#:positive\n")
        self.write('books.unlabeled', "a:1 #label#:unlabeled\n")
        with self.assertRaises(MissingDataError) as ctx:
            load_domains(self.dir, ['books', 'kitchen'])
        self.assertIn('kitchen', str(ctx.exception))

    def test_source_file(self):
        path = self.write('books.lab', "a:1 b:2 #label#:positive\nc:1 #label#:negative\n")
        data = domain_from_file(path, 'source')
        self.assertEqual(data.domain, 'books')
        self.assertEqual(list(data.labeled.labels), [1, 0])
        self.assertEqual(len(data.unlabeled), 0)

    def test_source_file_needs_labels(self):
        path = self.write('books.unlab', "a:1 #label#:unlabeled\n")
        with self.assertRaises(MissingLabelsError):
            domain_from_file(path, 'source')

    def test_target_file(self):
        unlabeled = domain_from_file(self.write('elec.unlab', "a:1 #label#:unlabeled\n"), 'target')
        self.assertEqual(unlabeled.domain, 'elec')
        self.assertEqual(len(unlabeled.unlabeled), 1)
        self.assertFalse(unlabeled.labeled.labeled)
        labeled = domain_from_file(self.write('elec.lab', "a:1 b:1 #label#:positive\n"), 'target')
        self.assertEqual(list(labeled.labeled.labels), [1])
        self.assertFalse(labeled.unlabeled.labeled)
        self.assertEqual(labeled.unlabeled.documents[0].tokens, ('a', 'b'))
        self.assertIsNone(labeled.unlabeled.documents[0].label)


if __name__ == '__main__':
    unittest.main()
