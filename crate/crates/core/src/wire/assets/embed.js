// Minimal embeddable agent: <script src="/embed.js"></script> then
// VTutor.embed({ container: el, avatarId: "tutor", persona: "..." }).
(function () {
  "use strict";

  var MOUTH = {
    A: { w: 34, h: 30, r: "45%" },
    E: { w: 44, h: 16, r: "40%" },
    I: { w: 48, h: 8, r: "40%" },
    O: { w: 26, h: 28, r: "50%" },
    U: { w: 18, h: 18, r: "50%" },
    SIL: { w: 40, h: 3, r: "2px" }
  };
  var LATE_DROP_SECONDS = 0.05;

  function defaultUrl() {
    var scripts = document.getElementsByTagName("script");
    for (var i = 0; i < scripts.length; i++) {
      var src = scripts[i].src || "";
      if (src.indexOf("/embed.js") >= 0) {
        return src.replace(/^http/, "ws").replace(/\/embed\.js.*$/, "/agent");
      }
    }
    return (location.protocol === "https:" ? "wss://" : "ws://") + location.host + "/agent";
  }

  function el(tag, style, text) {
    var e = document.createElement(tag);
    if (style) e.setAttribute("style", style);
    if (text) e.textContent = text;
    return e;
  }

  function embed(opts) {
    opts = opts || {};
    var root = opts.container || document.body;
    var box = el("div", "font-family:sans-serif;width:320px;border:1px solid #ccc;border-radius:8px;padding:8px");
    var face = el("div", "position:relative;width:160px;height:160px;margin:0 auto;border-radius:50%;background:#ffe0bd");
    var eyes = el("div", "position:absolute;top:55px;width:100%;text-align:center;font-size:22px", "●   ●");
    var mouth = el("div", "position:absolute;left:50%;top:105px;background:#8b2d2d;transform:translate(-50%,-50%)");
    var label = el("div", "text-align:center;font-size:12px;color:#666;height:16px");
    var log = el("div", "height:120px;overflow:auto;font-size:13px;margin:6px 0");
    var input = el("input", "width:100%;box-sizing:border-box");
    input.placeholder = "Say something and press Enter";
    face.appendChild(eyes);
    face.appendChild(mouth);
    box.appendChild(face);
    box.appendChild(label);
    box.appendChild(log);
    box.appendChild(input);
    root.appendChild(box);

    function setMouth(v) {
      var m = MOUTH[v] || MOUTH.SIL;
      mouth.style.width = m.w + "px";
      mouth.style.height = m.h + "px";
      mouth.style.borderRadius = m.r;
    }
    setMouth("SIL");

    function say(who, text) {
      var line = el("div", null, who + ": " + text);
      log.appendChild(line);
      log.scrollTop = log.scrollHeight;
    }

    var ws = new WebSocket(opts.url || defaultUrl());
    var audio = null;
    var origin = 0;
    var timers = [];

    function send(type, payload) {
      ws.send(JSON.stringify(payload === undefined ? { type: type } : { type: type, payload: payload }));
    }

    function clock() {
      return audio ? audio.currentTime - origin : 0;
    }

    function playChunk(p) {
      if (!audio) return;
      var bytes = atob(p.pcm_b64);
      var n = bytes.length / 2;
      var buf = audio.createBuffer(1, n, p.rate);
      var data = buf.getChannelData(0);
      for (var i = 0; i < n; i++) {
        var s = bytes.charCodeAt(2 * i) | (bytes.charCodeAt(2 * i + 1) << 8);
        data[i] = (s >= 32768 ? s - 65536 : s) / 32768;
      }
      var src = audio.createBufferSource();
      src.buffer = buf;
      src.connect(audio.destination);
      src.start(origin + p.t_start);
    }

    function scheduleViseme(p) {
      var delay = p.t - clock();
      if (delay < -LATE_DROP_SECONDS) return;
      timers.push(setTimeout(function () { setMouth(p.dominant); }, Math.max(0, delay * 1000)));
    }

    ws.onopen = function () {
      send("open", { avatar_id: opts.avatarId || "tutor", persona_prompt: opts.persona || "" });
    };

    ws.onmessage = function (msg) {
      var ev = JSON.parse(msg.data);
      var p = ev.payload || {};
      switch (ev.type) {
        case "utterance_start":
          if (!audio) audio = new (window.AudioContext || window.webkitAudioContext)();
          origin = audio.currentTime + 0.05;
          if (p.text) say("agent", p.text);
          break;
        case "audio_chunk": playChunk(p); break;
        case "viseme": scheduleViseme(p); break;
        case "utterance_end":
          timers.push(setTimeout(function () { setMouth("SIL"); }, Math.max(0, (p.audio_duration_seconds - clock()) * 1000)));
          break;
        case "expression": label.textContent = "expression: " + p.name; break;
        case "gesture": label.textContent = "gesture: " + p.name; break;
        case "avatar_switched": label.textContent = "avatar: " + p.avatar_id; break;
        case "error": say("error", p.code + ": " + p.message); break;
      }
      if (opts.onEvent) opts.onEvent(ev);
    };

    input.addEventListener("keydown", function (e) {
      if (e.key !== "Enter" || !input.value) return;
      if (!audio) audio = new (window.AudioContext || window.webkitAudioContext)();
      say("you", input.value);
      send("user_turn", { text: input.value });
      input.value = "";
    });

    return {
      send: send,
      speak: function (text) { send("speak_text", { text: text }); },
      setExpression: function (name) { send("set_expression", { name: name }); },
      setGesture: function (name) { send("set_gesture", { name: name }); },
      switchAvatar: function (id) { send("switch_avatar", { avatar_id: id }); },
      close: function () { send("close"); ws.close(); timers.forEach(clearTimeout); }
    };
  }

  window.VTutor = { embed: embed };
})();
