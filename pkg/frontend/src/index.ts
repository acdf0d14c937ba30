export { CsvTable, SlopeHeader, readCsv, column, series, slopeHeaders } from "./csv.js";
export { fitLogLogSlope } from "./fit.js";
export {
  FigureKind, RENDERERS, RESIDUAL_FLOOR, renderC2Gap, renderEnergyBudget,
  renderResidual, renderSweepDecay,
} from "./figures.js";
export { run } from "./cli.js";
