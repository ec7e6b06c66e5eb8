"""From a regex to the posting-list plan that prefilters it.

Extracts the required literals of an href-matching pattern, then compiles
them against a four-key index. Unindexed literals drop out of the plan.
"""

from gramdex.index_plan import build_index, compile_plan, evaluate_plan, plan_to_sexpr
from gramdex.regex_literal import literal_tree, to_sexpr
from gramdex.workload import Workload

pattern = b"<a href=(\"|').*ZZZ\\.pdf(\"|')>"
records = [
    b'<a href="ZZZ.pdf">',
    b"<a href='x/ZZZ.pdf'>",
    b'<a href="ZZZ.doc">',
    b"plain text with a pdf",
]

tree = literal_tree(pattern)
print("literal tree:", to_sexpr(tree))

workload = Workload.from_texts(records, [pattern])
index = build_index(workload, [b'"', b"'", b"Z", b"pdf"])
plan = compile_plan(tree, index)
print("plan:        ", plan_to_sexpr(plan))

survivors = evaluate_plan(plan, index, workload.record_count).tolist()
print("survivors:   ", survivors, "of", workload.record_count, "records")
