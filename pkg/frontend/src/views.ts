/**
 * Plain-DOM rendering of the console screens: upload, design, audit,
 * hardness. No framework; the whole UI re-renders on state change, which is
 * plenty at this scale. Every number shown in a result panel is the
 * verbatim token from the wire (panel.display), never a re-serialized
 * float; the only conversion applied locally is the radians/cosine dial.
 */

import { DesignState, Panel } from "./state.js";
import { clampTheta, cosineToRadians, radiansToCosine } from "./format.js";

function el(tag: string, attrs: Record<string, string> = {}, ...children: (Node | string)[]): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function button(label: string, onClick: () => void, cls = "action"): HTMLElement {
  const node = el("button", { class: cls }, label);
  node.addEventListener("click", onClick);
  return node;
}

function badge(panel: Panel<unknown>): HTMLElement {
  if (panel.inFlight) {
    const pct = Math.round(panel.progress * 100);
    return el("span", { class: "badge running" }, `running ${pct}%`);
  }
  if (panel.error) return el("span", { class: "badge error" }, panel.error);
  if (panel.stale && panel.data) return el("span", { class: "badge stale" }, "stale");
  return el("span", { class: "badge" }, "");
}

function uploadScreen(state: DesignState): HTMLElement {
  const csvInput = el("textarea", {
    class: "csv-input",
    placeholder: "paste CSV with a header row, or choose a file",
    rows: "8",
  }) as HTMLTextAreaElement;
  const file = el("input", { type: "file", accept: ".csv,text/csv" }) as HTMLInputElement;
  file.addEventListener("change", async () => {
    const chosen = file.files?.[0];
    if (chosen) csvInput.value = await chosen.text();
  });
  const scoring = el("input", { value: "x1,x2", title: "scoring columns" }) as HTMLInputElement;
  const idCol = el("input", { value: "id", title: "id column" }) as HTMLInputElement;
  const sensitive = el("input", { value: "location", title: "sensitive column" }) as HTMLInputElement;
  const status = el("div", { class: "status" });
  const submit = button("Create session", async () => {
    status.textContent = "uploading...";
    try {
      await state.upload(csvInput.value, {
        scoring_cols: scoring.value,
        id_col: idCol.value || undefined,
        sensitive: sensitive.value || undefined,
      });
      status.textContent = "";
    } catch (err) {
      status.textContent = String(err);
    }
  });
  const info = state.session
    ? el(
        "p",
        { class: "session-info" },
        `session ${state.session.session_id.slice(0, 8)}: n=${state.session.n}, d=${state.session.d}, ` +
          `groups: ${state.session.groups.join(", ")}`,
      )
    : el("p", {}, "no dataset loaded");
  return el(
    "section",
    { class: "screen" },
    el("h2", {}, "Upload"),
    file,
    csvInput,
    el("div", { class: "row" }, el("label", {}, "scoring columns ", scoring), el("label", {}, "id ", idCol), el("label", {}, "sensitive ", sensitive)),
    submit,
    status,
    info,
  );
}

function weightControls(state: DesignState): HTMLElement {
  const container = el("div", { class: "weights" });
  const shown = Math.min(state.weights.length, 12);
  for (let i = 0; i < shown; i++) {
    const slider = el("input", {
      type: "range",
      min: "-2",
      max: "2",
      step: "0.01",
      value: String(state.weights[i]),
    }) as HTMLInputElement;
    const numeric = el("input", {
      type: "number",
      step: "0.01",
      value: String(state.weights[i]),
      class: "weight-number",
    }) as HTMLInputElement;
    slider.addEventListener("input", () => state.setWeight(i, Number(slider.value)));
    numeric.addEventListener("change", () => state.setWeight(i, Number(numeric.value)));
    container.append(el("label", { class: "weight-row" }, `w${i + 1} `, slider, numeric));
  }
  if (state.weights.length > 12) {
    container.append(el("p", { class: "note" }, `showing 12 of ${state.weights.length} weights`));
  }
  return container;
}

function thetaDial(state: DesignState): HTMLElement {
  const isCos = state.thetaUnit === "cosine";
  const value = isCos ? radiansToCosine(state.theta) : state.theta;
  const input = el("input", {
    type: "number",
    step: isCos ? "0.0001" : "0.01",
    value: value.toPrecision(6),
  }) as HTMLInputElement;
  input.addEventListener("change", () => {
    const entered = Number(input.value);
    const theta = isCos ? cosineToRadians(entered) : entered;
    if (!state.setTheta(clampTheta(theta) === theta ? theta : clampTheta(theta))) {
      input.value = value.toPrecision(6);
    }
  });
  const toggle = button(isCos ? "show radians" : "show cosine", () =>
    state.setThetaUnit(isCos ? "radians" : "cosine"),
  );
  return el("div", { class: "theta-dial" }, el("label", {}, isCos ? "min cosine sim " : "vicinity angle (rad) ", input), toggle);
}

function rankingTable(state: DesignState): HTMLElement {
  const panel = state.ranking;
  if (!panel.data) return el("p", {}, "no ranking yet");
  const k = panel.data.k ?? 3;
  const rows = panel.data.order.map((id, i) => {
    const cls = i < k ? "topk" : "";
    return el(
      "tr",
      { class: cls },
      el("td", {}, String(i + 1)),
      el("td", {}, id),
      el("td", {}, panel.display[`scores[${i}]`] ?? ""),
      el("td", {}, el("span", { class: "group-badge" }, panel.data!.groups[i] ?? "")),
    );
  });
  return el(
    "table",
    { class: "ranking" },
    el("tr", {}, el("th", {}, "#"), el("th", {}, "id"), el("th", {}, "score"), el("th", {}, "group")),
    ...rows,
  );
}

function fairnessIndicator(state: DesignState): HTMLElement {
  const fair = state.ranking.data?.fair;
  if (fair === undefined || state.constraints.length === 0) {
    return el("span", { class: "verdict none" }, "no constraints");
  }
  return el(
    "span",
    { class: fair ? "verdict fair" : "verdict unfair" },
    fair ? `fair (${state.ranking.display["fair"] ?? "true"})` : `unfair (${state.ranking.display["fair"] ?? "false"})`,
  );
}

function constraintEditor(state: DesignState): HTMLElement {
  const list = el("div", { class: "constraints" });
  state.constraints.forEach((row, index) => {
    list.append(
      el(
        "div",
        { class: "constraint-row" },
        `${row.group}: top-${row.k} in [${row.min_count}, ${row.max_count ?? row.k}] `,
        button("remove", () => state.removeConstraint(index), "small"),
      ),
    );
  });
  const group = el("input", { placeholder: "group", class: "short" }) as HTMLInputElement;
  const k = el("input", { type: "number", value: "3", class: "tiny" }) as HTMLInputElement;
  const min = el("input", { type: "number", value: "1", class: "tiny" }) as HTMLInputElement;
  const max = el("input", { type: "number", placeholder: "max", class: "tiny" }) as HTMLInputElement;
  list.append(
    el(
      "div",
      { class: "constraint-row" },
      group,
      " top-",
      k,
      " min ",
      min,
      " max ",
      max,
      button("add", () => {
        if (!group.value) return;
        state.addConstraint({
          group: group.value,
          k: Number(k.value),
          min_count: Number(min.value),
          max_count: max.value === "" ? null : Number(max.value),
        });
      }, "small"),
    ),
  );
  return list;
}

function designScreen(state: DesignState): HTMLElement {
  const suggestion = state.suggestion;
  const suggestionBody = suggestion.data
    ? suggestion.data.found
      ? el(
          "div",
          {},
          el("p", {}, `fair function found after ${suggestion.display["samples_used"] ?? "?"} samples, ` +
            `angular gap ${suggestion.display["angular_gap"] ?? "?"} rad`),
          el(
            "p",
            { class: "mono" },
            "weights: [" +
              (suggestion.data.function ?? []).map((_, i) => suggestion.display[`function[${i}]`] ?? "?").join(", ") +
              "]",
          ),
          button("Apply to sliders", () => {
            if (state.applySuggestion()) void state.refreshRanking();
          }),
        )
      : el("p", {}, `no fair function within budget (${suggestion.display["samples_used"] ?? "?"} samples used)`)
    : el("p", {}, "");
  return el(
    "section",
    { class: "screen" },
    el("h2", {}, "Design"),
    weightControls(state),
    thetaDial(state),
    el("h3", {}, "Constraints"),
    constraintEditor(state),
    el("div", { class: "row" }, button("Rank", () => void state.refreshRanking()), fairnessIndicator(state), badge(state.ranking)),
    rankingTable(state),
    el("div", { class: "row" }, button("Suggest fair function", () => void state.runSuggestion()), badge(suggestion)),
    suggestionBody,
  );
}

function auditScreen(state: DesignState): HTMLElement {
  const audit = state.audit;
  const stable = state.stable;
  const auditBody = audit.data
    ? el(
        "p",
        {},
        `reference stability ${audit.display["stability"] ?? "?"} ± ${audit.display["error"] ?? "?"} ` +
          `over ${audit.display["samples"] ?? "?"} samples`,
      )
    : el("p", {}, "");
  const bars = el("div", { class: "histogram" });
  if (stable.data) {
    const max = Math.max(...stable.data.top_rankings.map((entry) => entry.count), 1);
    stable.data.top_rankings.forEach((entry, i) => {
      const height = Math.round((entry.count / max) * 120);
      bars.append(
        el(
          "div",
          { class: "bar-wrap", title: entry.ids.join(" > ") },
          el("div", { class: "bar", style: `height:${height}px` }),
          el("span", { class: "bar-label" }, stable.display[`top_rankings[${i}].count`] ?? String(entry.count)),
        ),
      );
    });
  }
  return el(
    "section",
    { class: "screen" },
    el("h2", {}, "Audit"),
    el("div", { class: "row" }, button("Audit current weights", () => void state.runAudit()), badge(audit)),
    auditBody,
    el("div", { class: "row" }, button("Top stable rankings", () => void state.runStable()), badge(stable)),
    bars,
    stable.data
      ? el(
          "div",
          {},
          el("p", {}, `reference ranking stability ${stable.display["reference_stability[0]"] ?? "?"} ` +
            `± ${stable.display["reference_stability[1]"] ?? "?"}`),
          button("Adopt most stable ranking's function", () => {
            if (state.adoptMostStable()) void state.refreshRanking();
          }),
        )
      : el("span", {}),
  );
}

function hardnessScreen(state: DesignState): HTMLElement {
  const up = state.up;
  const samples = el("select", {}) as HTMLSelectElement;
  for (const count of [1000, 10_000, 100_000]) {
    const option = el("option", { value: String(count) }, count.toLocaleString()) as HTMLOptionElement;
    option.selected = state.samples === count;
    samples.append(option);
  }
  samples.addEventListener("change", () => state.setSamples(Number(samples.value)));
  const gauge = up.data
    ? el(
        "div",
        { class: "gauge" },
        el("div", { class: "gauge-fill", style: `width:${Math.round(up.data.up * 100)}%` }),
        el(
          "span",
          { class: "gauge-text" },
          `UP = ${up.display["up"] ?? "?"} ± ${up.display["error"] ?? "?"} (alpha ${up.display["alpha"] ?? "?"})`,
        ),
      )
    : el("p", {}, "");
  return el(
    "section",
    { class: "screen" },
    el("h2", {}, "Hardness"),
    el("div", { class: "row" }, el("label", {}, "samples ", samples), button("Estimate unfair portion", () => void state.runUp()), badge(up)),
    gauge,
  );
}

export function renderApp(root: HTMLElement, state: DesignState): void {
  let active = "upload";
  const render = () => {
    root.replaceChildren();
    const tabs = el("nav", { class: "tabs" });
    for (const name of ["upload", "design", "audit", "hardness"]) {
      const tab = button(name, () => {
        active = name;
        render();
      }, name === active ? "tab active" : "tab");
      tabs.append(tab);
    }
    const screen =
      active === "upload"
        ? uploadScreen(state)
        : active === "design"
          ? designScreen(state)
          : active === "audit"
            ? auditScreen(state)
            : hardnessScreen(state);
    root.append(el("h1", {}, "fairscore console"), tabs, screen);
  };
  state.onChange(render);
  render();
}
