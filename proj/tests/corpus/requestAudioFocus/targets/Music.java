public class Music {
    void start(AudioManager am, AudioManager.OnAudioFocusChangeListener listener) {
        int granted = am.requestAudioFocus(listener, AudioManager.STREAM_MUSIC, AudioManager.AUDIOFOCUS_GAIN);
        log("focus " + granted);
    }
}
