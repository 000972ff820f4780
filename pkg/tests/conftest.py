import json
import random
from datetime import datetime, timedelta, timezone

import pandas as pd
import pytest

from src.corpus.records import ChangeLabel, ChangeRecord
from src.trees.model import Label, Tree, TreeBuilder

ALPHABET = ("A", "B", "C")
UTC = timezone.utc

LISTING_SOURCE = """public class Example {
    public String foo(int i) {
        if (i == 0) return "Foo!";
    }
}"""

LISTING_SEXPR = (
    "(CompilationUnit(TypeDeclaration(Modifier:public)(TYPE_DECLARATION_KIND:class)(SimpleName:Example)"
    "(MethodDeclaration (Modifier:public)(SimpleType(SimpleName:String))(SimpleName:foo)"
    "(SingleVariableDeclaration(PrimitiveType: int)(SimpleName: i))"
    "(Block (IfStatement(InfixExpression(SimpleName: i)(INFIX_EXPRESSION_OPERATOR: ==)(NumberLiteral: 0))"
    "(ReturnStatement(StringLiteral: \"Foo!\")))))))"
)


def structurally_equal(a: Tree, b: Tree) -> bool:
    return a.labels == b.labels and a.children == b.children


def deep_parens_source(depth: int) -> str:
    return "int m(int x) { return " + "(" * depth + "x" + ")" * depth + "; }"


def deep_else_if_source(arms: int) -> str:
    chain = " else ".join(f"if (x == {i}) return {i};" for i in range(arms))
    return f"int m(int x) {{ {chain} else return 0; }}"


# ---------- random trees ----------
def random_tree(rng: random.Random, max_nodes: int = 10, alphabet=ALPHABET, max_children: int = 3) -> Tree:
    """Pre-order random tree: each new node hangs under a random node still on the open path."""
    size = rng.randint(1, max_nodes)
    builder = TreeBuilder()
    builder.add(Label(rng.choice(alphabet)))
    path = [0]
    kids = {0: 0}
    for _ in range(size - 1):
        # close nodes from the bottom of the path at random, never the root
        while len(path) > 1 and (kids[path[-1]] >= max_children or rng.random() < 0.35):
            path.pop()
        if kids[path[-1]] >= max_children:
            break
        parent = path[-1]
        node = builder.add(Label(rng.choice(alphabet)), parent)
        kids[parent] += 1
        kids[node] = 0
        path.append(node)
    return builder.build()


@pytest.fixture
def rng():
    return random.Random(20240229)


@pytest.fixture
def make_tree():
    return random_tree


# ---------- change records ----------
def make_record(
    change_id: str,
    ts: datetime,
    label: ChangeLabel | None = ChangeLabel.BUG_INDUCING,
    source: str = "public int f() { return 1; }",
    project: str = "demo",
    commit: str | None = None,
    method: str = "f",
    paired_fix_id: str | None = None,
    ast: Tree | None = None,
) -> ChangeRecord:
    return ChangeRecord(
        change_id=change_id,
        project=project,
        commit_hash=commit or f"c-{change_id}",
        file_path="src/Demo.java",
        method_name=method,
        timestamp=ts,
        label=label,
        source_text=source,
        ast=ast,
        paired_fix_id=paired_fix_id,
    )


@pytest.fixture
def record_factory():
    return make_record


def family_source(f: int, renamed: bool = False) -> str:
    """Method of planted family f; the renamed variant changes the method name and one local (Type-2 style)."""
    name = f"compute_{f}" if renamed else f"calc_{f}"
    local = f"u_{f}" if renamed else f"t_{f}"
    return (
        f"public int {name}(int a_{f}, int b_{f}) {{\n"
        f"    int {local} = a_{f} * {1000 + f};\n"
        f"    if ({local} > {2000 + f}) {{\n"
        f"        return {local} - b_{f};\n"
        f"    }}\n"
        f"    log_{f}(\"note_{f}\");\n"
        f"    return b_{f} + {3000 + f};\n"
        f"}}"
    )


def long_method_source(v: int, statements: int) -> str:
    """Method of variant v with the given number of statements; about ten tree nodes per statement."""
    body = []
    for j in range(statements):
        if j % 3 == 0:
            body.append(f"if (a_{v} > {j}) {{ total = total + a_{v} * {j}; }}")
        elif j % 3 == 1:
            body.append(f"log_{v}(\"step_{j}\", total);")
        else:
            body.append(f"int w_{j} = b_{v} - {j};")
    joined = " ".join(body)
    return f"public int run_{v}(int a_{v}, int b_{v}) {{ int total = 0; {joined} return total; }}"


def planted_corpus(families: int = 12, project: str = "planted"):
    """Originals in January, their renamed duplicates in February and March.

    Even families are bug-inducing, odd ones bug-fixing. Returns (records, ids of the duplicates).
    """
    start = datetime(2021, 1, 3, tzinfo=UTC)
    records, queries = [], []
    for f in range(families):
        label = ChangeLabel.BUG_INDUCING if f % 2 == 0 else ChangeLabel.BUG_FIXING
        records.append(make_record(f"orig-{f}", start + timedelta(hours=f), label, family_source(f),
                                   project=project, method=f"calc_{f}"))
    dup_start = datetime(2021, 2, 1, tzinfo=UTC)
    for f in range(families):
        label = ChangeLabel.BUG_INDUCING if f % 2 == 0 else ChangeLabel.BUG_FIXING
        ts = dup_start + timedelta(days=3 * f)
        records.append(make_record(f"dup-{f}", ts, label, family_source(f, renamed=True),
                                   project=project, method=f"compute_{f}"))
        queries.append(f"dup-{f}")
    return records, queries


@pytest.fixture
def planted():
    return planted_corpus()


# ---------- files ----------
def record_to_json(r: ChangeRecord) -> dict:
    return {
        "change_id": r.change_id,
        "project": r.project,
        "commit_hash": r.commit_hash,
        "file_path": r.file_path,
        "method_name": r.method_name,
        "timestamp": r.timestamp.isoformat(),
        "label": r.label.value if r.label else None,
        "source_text": r.source_text,
        "paired_fix_id": r.paired_fix_id,
    }


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return path


@pytest.fixture
def planted_jsonl(tmp_path, planted):
    records, _ = planted
    return write_jsonl(tmp_path / "planted.jsonl", [record_to_json(r) for r in records])


@pytest.fixture
def td_csv(tmp_path):
    rows = [
        # project, commit, file, method, date, change type, label, source, fix commit
        ("p1", "aaa", "src/A.java", "run", "2020-01-05T10:00:00Z", "MODIFY", "FAULT_INDUCING",
         "public int run(int x) { return x + 1; }", "ccc"),
        ("p1", "bbb", "src/A.java", "stop", "2020-01-20T10:00:00Z", "ADD", "FAULT_INDUCING",
         "public int stop(int y) { return y - 1; }", ""),
        ("p1", "ccc", "src/A.java", "run", "2020-02-02T10:00:00Z", "MODIFY", "FAULT_FIXING",
         "public int run(int x) { return x + 2; }", ""),
        ("p1", "ddd", "src/A.java", "old", "2020-02-03T10:00:00Z", "DELETE", "FAULT_INDUCING",
         "public int old() { return 0; }", ""),
        ("p1", "eee", "src/B.java", "tidy", "2020-02-04T10:00:00Z", "MODIFY", "REFACTORING",
         "public int tidy() { return 0; }", ""),
        ("p1", "fff", "docs/README.md", "n/a", "2020-02-05T10:00:00Z", "MODIFY", "FAULT_INDUCING",
         "# docs", ""),
    ]
    df = pd.DataFrame(rows, columns=[
        "PROJECT_ID", "COMMIT_HASH", "FILE", "METHOD_NAME", "COMMITTER_DATE", "CHANGE_TYPE", "LABEL",
        "SOURCE_CODE", "FAULT_FIXING_COMMIT_HASH",
    ])
    path = tmp_path / "td.csv"
    df.to_csv(path, index=False)
    return path


# ---------- clone bench ----------
CLONE_A = """public int sum(int a, int b) {
    int s = a + b;
    if (s > 10) {
        return s - 10;
    }
    return s;
}"""

CLONE_A_RENAMED = """public int add(int x, int y) {
    int t = x + y;
    if (t > 10) {
        return t - 10;
    }
    return t;
}"""

CLONE_B = """public boolean check(String name) {
    if (name == null) {
        return false;
    }
    log("checking");
    return name.isEmpty() == false;
}"""

CLONE_C = """public int tiny() { return 1; }"""

CLONE_D = """public int scale(int v, int w) {
    int r = v * w;
    if (r < 0) {
        return 0 - r;
    }
    return r;
}"""


@pytest.fixture
def clonebench_dir(tmp_path):
    root = tmp_path / "bench"
    f1 = root / "functionality_1"
    f2 = root / "functionality_2"
    f1.mkdir(parents=True)
    f2.mkdir(parents=True)
    (f1 / "m1.java").write_text(CLONE_A, encoding="utf-8")
    (f1 / "m2.java").write_text(CLONE_A, encoding="utf-8")
    (f1 / "m3.java").write_text(CLONE_A_RENAMED, encoding="utf-8")
    (f1 / "m4.java").write_text(CLONE_B, encoding="utf-8")
    (f2 / "m5.java").write_text(CLONE_D, encoding="utf-8")
    (f2 / "m6.java").write_text(CLONE_D, encoding="utf-8")
    (f2 / "m7.java").write_text(CLONE_C, encoding="utf-8")
    pd.DataFrame(
        [
            ("m1", "m2", "true", "T1"),
            ("m1", "m3", "true", "T2"),
            ("m2", "m3", "true", "T2"),
            ("m1", "m4", "false", ""),
            ("m5", "m6", "true", "T1"),
            ("m5", "m7", "false", ""),
        ],
        columns=["id1", "id2", "is_true", "clone_type"],
    ).to_csv(root / "pairs.csv", index=False)
    pd.DataFrame(
        [("m1", "alpha"), ("m2", "alpha"), ("m3", "beta"), ("m4", "alpha"),
         ("m5", "beta"), ("m6", "beta"), ("m7", "beta")],
        columns=["method_id", "project"],
    ).to_csv(root / "methods.csv", index=False)
    return root
