// Schema-driven spec form: one collapsible group per category, a block
// per subcategory, numeric sliders bounded by schema ranges, categorical
// dropdowns from vocabularies. No feature names are hardcoded, so schema
// growth needs no UI changes.

import type { FeatureDef, FeatureMap, SchemaPayload } from './types';

export type EditListener = (edit: FeatureMap) => void;

function numericControl(f: FeatureDef, value: number, onEdit: EditListener): HTMLElement {
  const wrap = document.createElement('label');
  wrap.className = 'feature feature-numeric';
  wrap.dataset.feature = f.name;

  const title = document.createElement('span');
  title.className = 'feature-name';
  title.textContent = f.name;

  const slider = document.createElement('input');
  slider.type = 'range';
  const lo = f.numeric_min ?? 0;
  const hi = f.numeric_max ?? 1;
  slider.min = String(lo);
  slider.max = String(hi);
  slider.step = String((hi - lo) / 200 || 1);
  slider.value = String(value);
  slider.dataset.feature = f.name;

  const readout = document.createElement('output');
  readout.textContent = String(value);

  slider.addEventListener('input', () => {
    readout.textContent = slider.value;
    onEdit({ [f.name]: Number(slider.value) });
  });

  wrap.append(title, slider, readout);
  return wrap;
}

function categoricalControl(f: FeatureDef, value: string, onEdit: EditListener): HTMLElement {
  const wrap = document.createElement('label');
  wrap.className = 'feature feature-categorical';
  wrap.dataset.feature = f.name;

  const title = document.createElement('span');
  title.className = 'feature-name';
  title.textContent = f.name;

  const select = document.createElement('select');
  select.dataset.feature = f.name;
  for (const option of f.vocabulary ?? []) {
    const el = document.createElement('option');
    el.value = option;
    el.textContent = option;
    if (option === value) el.selected = true;
    select.append(el);
  }
  select.addEventListener('change', () => onEdit({ [f.name]: select.value }));

  wrap.append(title, select);
  return wrap;
}

export function renderSpecForm(
  schema: SchemaPayload,
  values: FeatureMap,
  container: HTMLElement,
  onEdit: EditListener,
): void {
  container.textContent = '';
  for (const category of schema.categories) {
    const group = document.createElement('details');
    group.open = true;
    group.className = 'category-group';
    group.dataset.category = category;
    const summary = document.createElement('summary');
    summary.textContent = category;
    group.append(summary);

    const subcats = new Map<string, FeatureDef[]>();
    for (const f of schema.features.filter((f) => f.category === category)) {
      const list = subcats.get(f.subcategory) ?? [];
      list.push(f);
      subcats.set(f.subcategory, list);
    }
    for (const [subcategory, features] of subcats) {
      const block = document.createElement('fieldset');
      block.className = 'subcategory-group';
      block.dataset.subcategory = subcategory;
      const legend = document.createElement('legend');
      legend.textContent = subcategory;
      block.append(legend);
      for (const f of features) {
        block.append(
          f.kind === 'numeric'
            ? numericControl(f, Number(values[f.name] ?? f.numeric_min ?? 0), onEdit)
            : categoricalControl(f, String(values[f.name] ?? ''), onEdit),
        );
      }
      group.append(block);
    }
    container.append(group);
  }
}
