public class Alarm {
    void ring(AudioManager audio) {
        audio.requestAudioFocus(null, AudioManager.STREAM_ALARM, AudioManager.AUDIOFOCUS_GAIN);
    }
}
