import { ServiceApi } from './api'
import { ExplorerController } from './controller'
import { eventLabel, replayedSequence } from './model'
import { renderSwimlane } from './render'

const params = new URLSearchParams(window.location.search)
const api = new ServiceApi(params.get('service') ?? 'http://127.0.0.1:8000')
const controller = new ExplorerController(api)

const $ = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing #${id}`)
  return node as T
}

const traceSelect = $<HTMLSelectElement>('trace-select')
const seedInput = $<HTMLInputElement>('seed-input')
const startBtn = $<HTMLButtonElement>('start-btn')
const autoBtn = $<HTMLButtonElement>('auto-btn')
const resetBtn = $<HTMLButtonElement>('reset-btn')
const axisToggle = $<HTMLInputElement>('axis-toggle')
const lanes = $('lanes')
const status = $('status')
const noticeBox = $('notice')
const prefixBox = $('prefix')

controller.onChange = (state) => {
  traceSelect.replaceChildren(
    ...state.traces.map((t) => {
      const opt = document.createElement('option')
      opt.value = t.trace_id
      opt.textContent =
        `${t.trace_id} (n=${t.n}, skew ${t.epsilon_time}us, ` +
        `interval ${t.interval}us, ${t.event_count} events)`
      opt.selected = t.trace_id === state.traceId
      return opt
    }),
  )

  const model = controller.model()
  renderSwimlane(lanes, model, (eventId) => void controller.choose(eventId))

  const busy = state.pending
  startBtn.disabled = busy || !state.traceId
  autoBtn.disabled = busy || !state.snapshot
  resetBtn.disabled = busy || !state.snapshot

  if (state.snapshot) {
    const seq = replayedSequence(model)
    prefixBox.textContent = seq.length
      ? `replayed: ${seq.map((id) => eventLabel(id, state.events.length)).join(' ')}`
      : 'replayed: (nothing yet — click a highlighted event or use auto-step)'
    status.textContent =
      `${state.snapshot.remaining_count} events remaining, ` +
      `${state.snapshot.frontline.length} steppable`
  } else {
    prefixBox.textContent = ''
    status.textContent = state.traceId
      ? `${state.events.length} events loaded — start a session to replay`
      : 'pick a trace'
  }

  noticeBox.textContent = state.error ?? state.notice ?? ''
  noticeBox.className = state.error ? 'notice error' : state.notice ? 'notice' : 'notice hidden'
}

traceSelect.addEventListener('change', () => void controller.loadTrace(traceSelect.value))
startBtn.addEventListener('click', () => void controller.startSession(Number(seedInput.value) || 0))
autoBtn.addEventListener('click', () => void controller.auto(1))
resetBtn.addEventListener('click', () => void controller.reset())
axisToggle.addEventListener('change', () =>
  controller.setAxis(axisToggle.checked ? 'real_time' : 'pt'),
)

void (async () => {
  await controller.refreshTraces()
  const first = controller.state.traces[0]
  if (first) await controller.loadTrace(first.trace_id)
})()
