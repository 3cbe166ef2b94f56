# From a netlist and a template to a stored report, by hand and through the project runner.
import tempfile
from pathlib import Path

from chaindoc import (
    DiagramSpec,
    ProcessingBlock,
    Store,
    TagBinding,
    assemble_document,
    bind_providers,
    build_chain,
    build_diagram,
    bundled_example,
    parse_template,
    propagate,
    render_markdown,
    run_workflow,
    solve_transient,
)
from chaindoc.docgen.document import DocumentOptions, Metadata
from chaindoc.values import Series

chain = build_chain("""
V1 dc 1 in 0
R1 r 2k in out
C1 c 470n out 0 ic=0
Vout vprobe out 0
GND gnd 0
""")
w = solve_transient(chain, 5e-3, 5e-6)
values = {"Vout": Series(w.time_s, w.series["Vout"], "V")}

# processing blocks turn the waveform into the numbers a report cites
blocks = [
    ProcessingBlock.functional("v_end", "max", "Vout"),
    ProcessingBlock.functional("t_rise", "rise_time_10_90", "Vout"),
    ProcessingBlock.expression("t_rise_ms", "t_rise * 1000"),
]
values.update(propagate(blocks, values))
values["fig"] = build_diagram(DiagramSpec("transient", ("Vout",), "fig_step", "Capacitor voltage"), values)

template = parse_template("""# Step response
The output settles at {{v_end}} with a rise time of {{rise}} ms.

{{plot}}
""")
body = bind_providers(template, [
    TagBinding("v_end", "v_end", "%.3f"),
    TagBinding("rise", "t_rise_ms", "%.3f"),
    TagBinding("plot", "fig"),
], values)
doc = assemble_document("lab_report", Metadata("A. Student", "RC step"), body, DocumentOptions(references=["Lab notes"]))
md, assets = render_markdown(doc)
print(md)

# the bundled project does the same end to end and files the result
with tempfile.TemporaryDirectory() as tmp:
    bundle = run_workflow(bundled_example(), output_dir=Path(tmp, "out"), store_root=Path(tmp, "store"))
    print("written:", sorted(p.name for p in Path(tmp, "out").iterdir()))
    store = Store(Path(tmp, "store"))
    print([(r.doc_id, r.title, r.status) for r in store.list()])
    store.set_status(bundle.doc_id, "reviewed")
    store.archive(bundle.doc_id)
    print("after archive:", store.record(bundle.doc_id).status)
