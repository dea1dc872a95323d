// SVG rendering of a swimlane model. Rendering is a pure function of the
// model: the previous drawing is discarded wholesale on every update.

import type { SwimlaneModel } from './model'

const SVG_NS = 'http://www.w3.org/2000/svg'

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag)
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v))
  return node
}

export function renderSwimlane(
  container: HTMLElement,
  model: SwimlaneModel,
  onGlyphClick: (eventId: number) => void,
): void {
  container.textContent = ''
  const svg = el('svg', {
    viewBox: `0 0 ${model.width} ${model.height}`,
    width: model.width,
    height: model.height,
    class: 'swimlane',
  })

  for (const lane of model.lanes) {
    svg.appendChild(
      el('line', {
        x1: 0, y1: lane.y, x2: model.width, y2: lane.y, class: 'lane-line',
      }),
    )
    const label = el('text', { x: 8, y: lane.y - 8, class: 'lane-label' })
    label.textContent = lane.label
    svg.appendChild(label)
  }

  for (const arc of model.arcs) {
    const midX = (arc.x1 + arc.x2) / 2
    const bend = arc.y1 === arc.y2 ? arc.y1 - 18 : (arc.y1 + arc.y2) / 2
    svg.appendChild(
      el('path', {
        d: `M ${arc.x1} ${arc.y1} Q ${midX} ${bend} ${arc.x2} ${arc.y2}`,
        class: 'message-arc',
        'data-msg-id': arc.msgId,
      }),
    )
  }

  for (const glyph of model.glyphs) {
    const group = el('g', {
      class: `glyph glyph-${glyph.status}${glyph.clickable ? ' glyph-clickable' : ''}`,
      'data-event-id': glyph.eventId,
    })
    group.appendChild(el('circle', { cx: glyph.x, cy: glyph.y, r: 11 }))
    const label = el('text', { x: glyph.x, y: glyph.y + 4, class: 'glyph-label' })
    label.textContent = glyph.label
    group.appendChild(label)
    if (glyph.orderIndex !== null) {
      const order = el('text', { x: glyph.x, y: glyph.y - 16, class: 'glyph-order' })
      order.textContent = `#${glyph.orderIndex + 1}`
      group.appendChild(order)
    }
    const title = document.createElementNS(SVG_NS, 'title')
    title.textContent = glyph.tooltip
    group.appendChild(title)
    if (glyph.clickable) {
      group.addEventListener('click', () => onGlyphClick(glyph.eventId))
    }
    svg.appendChild(group)
  }

  container.appendChild(svg)
}
