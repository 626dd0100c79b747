/**
 * Thin rendering client over the sweep CSV contract.
 *
 * Exit codes: 0 rendered, 1 bad arguments / missing column / empty data,
 * 2 malformed CSV, 3 I/O failure.
 */

import { readFileSync, writeFileSync } from "node:fs";
import process from "node:process";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { CsvParseError, MissingColumnError, parseCsv } from "./csv.js";
import { EmptyDataError, PlotSpec, plotSpecSchema, render } from "./plot.js";

function parseSeries(raw: string[]): { column: string; label: string }[] {
  return raw.map((item) => {
    const sep = item.indexOf(":");
    if (sep < 0) {
      return { column: item, label: item };
    }
    return { column: item.slice(0, sep), label: item.slice(sep + 1) };
  });
}

export function main(argv: string[]): number {
  const args = yargs(argv)
    .option("input", { type: "string", demandOption: true, describe: "sweep CSV path" })
    .option("x", { type: "string", demandOption: true, describe: "x column name" })
    .option("y", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "y series as column or column:label (repeatable)",
    })
    .option("scale", {
      choices: ["linear", "log", "index"] as const,
      default: "linear" as const,
      describe: "x axis scale; index spaces points evenly by rank",
    })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("marker-y", {
      type: "string",
      describe: "column for the annotated first-row marker",
    })
    .option("marker-label", { type: "string", default: "one-way rate" })
    .option("title", { type: "string" })
    .strict()
    .exitProcess(false)
    .parseSync();

  let spec: PlotSpec;
  try {
    spec = plotSpecSchema.parse({
      x: args.x,
      series: parseSeries(args.y as string[]),
      scale: args.scale,
      marker: args["marker-y"]
        ? { column: args["marker-y"], label: args["marker-label"] }
        : undefined,
      title: args.title,
    });
  } catch (err) {
    console.error(`invalid plot spec: ${(err as Error).message}`);
    return 1;
  }

  let text: string;
  try {
    text = readFileSync(args.input, "utf-8");
  } catch (err) {
    console.error(`cannot read ${args.input}: ${(err as Error).message}`);
    return 3;
  }

  try {
    const table = parseCsv(text);
    const result = render(table, spec);
    writeFileSync(args.out, result.svg, "utf-8");
    for (const s of result.series) {
      console.log(`series ${s.column} ("${s.label}"): ${s.points} points`);
    }
    if (result.marker) {
      console.log(
        `marker "${result.marker.label}" at x=${result.marker.x}, y=${result.marker.y}`,
      );
    }
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof CsvParseError) {
      console.error(`malformed CSV: ${err.message}`);
      return 2;
    }
    if (err instanceof MissingColumnError || err instanceof EmptyDataError) {
      console.error(err.message);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code) {
      console.error(`I/O failure: ${(err as Error).message}`);
      return 3;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(hideBin(process.argv)));
}
