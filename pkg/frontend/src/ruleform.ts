// The editor's two views of one rule: a structured form and canonical DSL
// text. Form -> DSL is client-side string building; DSL -> form always
// goes through POST /rules:parse so the server grammar stays the single
// source of truth.

import type { RuleModel, StatCmp, StatMetric } from "./types.js";

export interface RuleFormStat {
  metric: StatMetric;
  windowS: number;
  cmp: StatCmp;
  threshold: number;
}

export interface RuleForm {
  mac: string;
  minRssi: number | null;
  stat: RuleFormStat | null;
  contentIds: string[];
  priority: number;
  enabled: boolean;
}

/** Canonical DSL text for a form (PRIORITY 0 and enabled stay implicit). */
export function formToDsl(form: RuleForm): string {
  const parts = [`IF visible(${form.mac.toUpperCase()})`];
  if (form.minRssi !== null) {
    parts.push(`AND rssi >= ${form.minRssi}`);
  }
  if (form.stat !== null) {
    parts.push(
      `AND stat(${form.stat.metric}, ${form.stat.windowS}) ${form.stat.cmp} ${form.stat.threshold}`,
    );
  }
  parts.push(`THEN show(${form.contentIds.join(", ")})`);
  if (form.priority !== 0) {
    parts.push(`PRIORITY ${form.priority}`);
  }
  if (!form.enabled) {
    parts.push("DISABLED");
  }
  return parts.join(" ");
}

export function ruleToForm(rule: RuleModel): RuleForm {
  return {
    mac: rule.trigger_mac,
    minRssi: rule.min_rssi_dbm ?? null,
    stat:
      rule.stat === null
        ? null
        : {
            metric: rule.stat.metric,
            windowS: rule.stat.window_s,
            cmp: rule.stat.cmp,
            threshold: rule.stat.threshold,
          },
    contentIds: [...rule.content_ids],
    priority: rule.priority,
    enabled: rule.enabled,
  };
}

export function formToRule(form: RuleForm, ruleId: string | null = null): RuleModel {
  return {
    rule_id: ruleId,
    trigger_mac: form.mac.toUpperCase(),
    content_ids: [...form.contentIds],
    min_rssi_dbm: form.minRssi,
    stat:
      form.stat === null
        ? null
        : {
            metric: form.stat.metric,
            window_s: form.stat.windowS,
            cmp: form.stat.cmp,
            threshold: form.stat.threshold,
          },
    priority: form.priority,
    enabled: form.enabled,
  };
}

/** Pull "line L, column C" out of a server SYNTAX_ERROR detail, if present. */
export function errorPosition(detail: string | null): { line: number; column: number } | null {
  if (!detail) return null;
  const match = /line (\d+), column (\d+)/.exec(detail);
  if (!match) return null;
  return { line: Number(match[1]), column: Number(match[2]) };
}
